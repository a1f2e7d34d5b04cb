#include "momentsos/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "momentsos/polyalg.hpp"  // fmt_double

namespace msos::sdp {

BlockMatrix BlockMatrix::zero(const std::vector<int>& dims) {
  BlockMatrix m;
  m.blocks.reserve(dims.size());
  for (int n : dims) m.blocks.push_back(Eigen::MatrixXd::Zero(n, n));
  return m;
}

BlockMatrix BlockMatrix::identity(const std::vector<int>& dims, double scale) {
  BlockMatrix m;
  m.blocks.reserve(dims.size());
  for (int n : dims)
    m.blocks.push_back(scale * Eigen::MatrixXd::Identity(n, n));
  return m;
}

double BlockMatrix::inner(const BlockMatrix& o) const {
  double acc = 0.0;
  for (size_t k = 0; k < blocks.size(); ++k)
    acc += blocks[k].cwiseProduct(o.blocks[k]).sum();
  return acc;
}

double BlockMatrix::max_abs() const {
  double v = 0.0;
  for (const auto& b : blocks)
    if (b.size() > 0) v = std::max(v, b.cwiseAbs().maxCoeff());
  return v;
}

double BlockMatrix::frob_norm() const {
  double acc = 0.0;
  for (const auto& b : blocks) acc += b.squaredNorm();
  return std::sqrt(acc);
}

BlockMatrix& BlockMatrix::axpy(double a, const BlockMatrix& o) {
  for (size_t k = 0; k < blocks.size(); ++k) blocks[k] += a * o.blocks[k];
  return *this;
}

BlockMatrix& BlockMatrix::scale(double a) {
  for (auto& b : blocks) b *= a;
  return *this;
}

void BlockMatrix::symmetrize() {
  for (auto& b : blocks) b = ((b + b.transpose()) * 0.5).eval();
}

int SdpProblem::total_dim() const {
  int n = 0;
  for (int d : block_dims) n += d;
  return n;
}

void SdpProblem::validate() const {
  auto check_shape = [&](const BlockMatrix& m, const char* what) {
    if (m.blocks.size() != block_dims.size())
      throw std::invalid_argument(std::string("SdpProblem: ") + what +
                                  ": wrong block count");
    for (size_t k = 0; k < m.blocks.size(); ++k) {
      const auto& blk = m.blocks[k];
      if (blk.rows() != block_dims[k] || blk.cols() != block_dims[k])
        throw std::invalid_argument(std::string("SdpProblem: ") + what +
                                    ": block dimension mismatch");
      if ((blk - blk.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * (1.0 + blk.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(std::string("SdpProblem: ") + what +
                                    ": block not symmetric");
    }
  };
  for (int d : block_dims)
    if (d < 1) throw std::invalid_argument("SdpProblem: block dim < 1");
  check_shape(c, "objective");
  if (static_cast<Eigen::Index>(a.size()) != b.size())
    throw std::invalid_argument("SdpProblem: #constraints != #rhs entries");
  for (const auto& ai : a) check_shape(ai, "constraint");
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::Unbounded: return "Unbounded";
    case SdpStatus::IterLimit: return "IterLimit";
    case SdpStatus::NumericalTrouble: return "NumericalTrouble";
  }
  return "Unknown";
}

namespace {

// A(X): vector of <A_i, X>.
Eigen::VectorXd apply_a(const std::vector<BlockMatrix>& a,
                        const BlockMatrix& x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = a[i].inner(x);
  return v;
}

// A*(y) = sum_i y_i A_i.
BlockMatrix apply_at(const std::vector<BlockMatrix>& a,
                     const Eigen::VectorXd& y,
                     const std::vector<int>& dims) {
  BlockMatrix m = BlockMatrix::zero(dims);
  for (size_t i = 0; i < a.size(); ++i)
    m.axpy(y(static_cast<Eigen::Index>(i)), a[i]);
  return m;
}

// Largest alpha with M + alpha*D still PSD, given the Cholesky factor of M.
double max_step(const std::vector<Eigen::LLT<Eigen::MatrixXd>>& chol,
                const BlockMatrix& dir) {
  double min_eig = 0.0;
  for (size_t k = 0; k < dir.blocks.size(); ++k) {
    const auto& L = chol[k].matrixL();
    Eigen::MatrixXd s = L.solve(dir.blocks[k]);
    Eigen::MatrixXd k_mat = L.solve(s.transpose()).transpose();
    k_mat = ((k_mat + k_mat.transpose()) * 0.5).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_mat,
                                                      Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  if (min_eig >= -1e-13) return std::numeric_limits<double>::infinity();
  return -1.0 / min_eig;
}

double min_eigenvalue(const BlockMatrix& m) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& blk : m.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk,
                                                      Eigen::EigenvaluesOnly);
    v = std::min(v, es.eigenvalues().minCoeff());
  }
  return v;
}

// Per-block Nesterov-Todd scaling data: W = G G^T satisfies W Z W = X, and
// in scaled coordinates Ginv X Ginv^T = G^T Z G = diag(sigma).
struct NtScaling {
  std::vector<Eigen::MatrixXd> g;
  std::vector<Eigen::MatrixXd> ginv;
  std::vector<Eigen::VectorXd> sigma;

  // G (M o E) G^T with E_kl = 2/(sigma_k + sigma_l), the inverse of the
  // scaled Lyapunov operator.
  BlockMatrix lyapunov_unscale(const BlockMatrix& m) const {
    BlockMatrix out;
    out.blocks.resize(m.blocks.size());
    for (size_t k = 0; k < m.blocks.size(); ++k) {
      const auto& s = sigma[k];
      Eigen::MatrixXd scaled = m.blocks[k];
      for (Eigen::Index i = 0; i < scaled.rows(); ++i)
        for (Eigen::Index j = 0; j < scaled.cols(); ++j)
          scaled(i, j) *= 2.0 / (s(i) + s(j));
      out.blocks[k] = g[k] * scaled * g[k].transpose();
    }
    return out;
  }

  BlockMatrix congruence_w(const BlockMatrix& m) const {  // W M W
    BlockMatrix out;
    out.blocks.resize(m.blocks.size());
    for (size_t k = 0; k < m.blocks.size(); ++k) {
      Eigen::MatrixXd inner = g[k].transpose() * m.blocks[k] * g[k];
      out.blocks[k] = g[k] * inner * g[k].transpose();
    }
    return out;
  }

  BlockMatrix to_scaled_x(const BlockMatrix& m) const {  // Ginv M Ginv^T
    BlockMatrix out;
    out.blocks.resize(m.blocks.size());
    for (size_t k = 0; k < m.blocks.size(); ++k)
      out.blocks[k] = ginv[k] * m.blocks[k] * ginv[k].transpose();
    return out;
  }

  BlockMatrix to_scaled_z(const BlockMatrix& m) const {  // G^T M G
    BlockMatrix out;
    out.blocks.resize(m.blocks.size());
    for (size_t k = 0; k < m.blocks.size(); ++k)
      out.blocks[k] = g[k].transpose() * m.blocks[k] * g[k];
    return out;
  }
};

bool compute_nt_scaling(const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lx,
                        const std::vector<Eigen::LLT<Eigen::MatrixXd>>& lz,
                        NtScaling& nt) {
  const size_t nb = lx.size();
  nt.g.resize(nb);
  nt.ginv.resize(nb);
  nt.sigma.resize(nb);
  for (size_t k = 0; k < nb; ++k) {
    Eigen::MatrixXd lxm = lx[k].matrixL();
    Eigen::MatrixXd lzm = lz[k].matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        lzm.transpose() * lxm, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() > 0 && sv.minCoeff() <= 0.0) return false;
    Eigen::VectorXd inv_sqrt = sv.array().sqrt().inverse();
    nt.g[k] = lxm * svd.matrixV() * inv_sqrt.asDiagonal();
    // Ginv = sqrt(S) V^T Lx^{-1}: solve Lx^T Y = V, then Ginv = sqrt(S) Y^T.
    Eigen::MatrixXd y_mat = lxm.triangularView<Eigen::Lower>()
                                .transpose()
                                .solve(svd.matrixV());
    nt.ginv[k] =
        sv.array().sqrt().matrix().asDiagonal() * y_mat.transpose();
    nt.sigma[k] = sv;
  }
  return true;
}

struct Workspace {
  const SdpProblem& p;
  const std::vector<int>& dims;
  int n;                 // total dimension
  Eigen::Index m;        // constraint count

  explicit Workspace(const SdpProblem& prob)
      : p(prob), dims(prob.block_dims), n(prob.total_dim()),
        m(prob.b.size()) {}
};

// Pre-iteration consistency screen on the constraint Gram matrix: detects
// linearly dependent constraints, and distinguishes an inconsistent system
// (contradictory constraints -> Infeasible) from a redundant one (invariant
// violation -> input error).
bool gram_precheck(const Workspace& w, SdpSolution& sol) {
  const Eigen::Index m = w.m;
  if (m == 0) return true;
  Eigen::MatrixXd gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      double v = w.p.a[static_cast<size_t>(i)].inner(w.p.a[static_cast<size_t>(j)]);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lmax = es.eigenvalues().maxCoeff();
  const double cut = 1e-12 * std::max(1.0, lmax);
  if (es.eigenvalues().minCoeff() > cut) return true;  // independent

  // b must lie in range(Gram) for A(X)=b to be solvable at all.
  Eigen::VectorXd proj = Eigen::VectorXd::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (es.eigenvalues()(k) <= cut) continue;
    const Eigen::VectorXd u = es.eigenvectors().col(k);
    proj += u.dot(w.p.b) * u;
  }
  if ((w.p.b - proj).norm() > 1e-9 * (1.0 + w.p.b.norm())) {
    sol.status = SdpStatus::Infeasible;
    return false;
  }
  throw std::invalid_argument(
      "SdpProblem: constraint matrices are linearly dependent");
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) {
  p.validate();
  const Workspace w(p);
  const auto& dims = p.block_dims;
  const double n = std::max(1, w.n);

  SdpSolution sol;
  sol.yvec = Eigen::VectorXd::Zero(w.m);

  if (!gram_precheck(w, sol)) {
    sol.x = BlockMatrix::zero(dims);
    sol.z = BlockMatrix::zero(dims);
    return sol;
  }

  // Cold start scales, CSDP-flavored.
  double a_scale = 0.0, b_over_a = 0.0;
  for (Eigen::Index i = 0; i < w.m; ++i) {
    const double fa = p.a[static_cast<size_t>(i)].frob_norm();
    a_scale = std::max(a_scale, fa);
    b_over_a = std::max(b_over_a, (1.0 + std::abs(p.b(i))) / (1.0 + fa));
  }
  const double xi_p = std::max({10.0, std::sqrt(n), n * b_over_a});
  const double xi_d =
      std::max({10.0, std::sqrt(n), (1.0 + p.c.frob_norm()) / std::sqrt(n),
                a_scale});

  BlockMatrix x = BlockMatrix::identity(dims, xi_p);
  BlockMatrix z = BlockMatrix::identity(dims, xi_d);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(w.m);

  const double bnorm = w.m > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0;
  const double cnorm = p.c.max_abs();

  std::vector<Eigen::LLT<Eigen::MatrixXd>> lx(dims.size()), lz(dims.size());
  int tiny_steps = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double pobj = p.c.inner(x);
    const double dobj = w.m > 0 ? p.b.dot(y) : 0.0;
    Eigen::VectorXd rp = p.b - apply_a(p.a, x);
    BlockMatrix rd = p.c;
    rd.axpy(-1.0, apply_at(p.a, y, dims));
    rd.axpy(-1.0, z);

    const double pinf =
        (w.m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + bnorm);
    const double dinf = rd.max_abs() / (1.0 + cnorm);
    const double mu = x.inner(z) / n;
    const double gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    sol.iterations = iter;
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    if (opts.trace) opts.trace({iter, mu, pobj, dobj, pinf, dinf});

    if (pinf <= opts.feas_tol && dinf <= opts.feas_tol &&
        gap_rel <= opts.gap_tol) {
      sol.status = SdpStatus::Optimal;
      sol.x = x;
      sol.yvec = y;
      sol.z = z;
      return sol;
    }

    // Divergence screens: a normalized dual ray certifies primal
    // infeasibility, a normalized primal ray certifies unboundedness.
    const double ynorm = w.m > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    if (ynorm > 1e8 * (1.0 + cnorm)) {
      Eigen::VectorXd yn = y / y.norm();
      BlockMatrix zray = apply_at(p.a, yn, dims);
      zray.scale(-1.0);
      sol.status = (p.b.dot(yn) > 1e-10 && min_eigenvalue(zray) > -1e-6)
                       ? SdpStatus::Infeasible
                       : SdpStatus::NumericalTrouble;
      sol.x = x;
      sol.yvec = y;
      sol.z = z;
      return sol;
    }
    if (x.max_abs() > 1e8 * (1.0 + xi_p)) {
      BlockMatrix xray = x;
      xray.scale(1.0 / x.frob_norm());
      const double ray_feas =
          w.m > 0 ? apply_a(p.a, xray).cwiseAbs().maxCoeff() : 0.0;
      sol.status = (ray_feas < 1e-6 && p.c.inner(xray) < -1e-10)
                       ? SdpStatus::Unbounded
                       : SdpStatus::NumericalTrouble;
      sol.x = x;
      sol.yvec = y;
      sol.z = z;
      return sol;
    }

    // Factor the iterates and build the NT scaling point.
    bool fact_ok = true;
    for (size_t k = 0; k < dims.size(); ++k) {
      lx[k].compute(x.blocks[k]);
      lz[k].compute(z.blocks[k]);
      if (lx[k].info() != Eigen::Success || lz[k].info() != Eigen::Success)
        fact_ok = false;
    }
    NtScaling nt;
    if (!fact_ok || !compute_nt_scaling(lx, lz, nt)) {
      sol.status = SdpStatus::NumericalTrouble;
      sol.x = x;
      sol.yvec = y;
      sol.z = z;
      return sol;
    }

    // Schur complement S_ij = <A_i, W A_j W>.
    Eigen::MatrixXd schur(w.m, w.m);
    std::vector<BlockMatrix> waw(static_cast<size_t>(w.m));
    for (Eigen::Index j = 0; j < w.m; ++j) {
      waw[static_cast<size_t>(j)] = nt.congruence_w(p.a[static_cast<size_t>(j)]);
      for (Eigen::Index i = 0; i <= j; ++i) {
        const double v =
            p.a[static_cast<size_t>(i)].inner(waw[static_cast<size_t>(j)]);
        schur(i, j) = v;
        schur(j, i) = v;
      }
    }

    Eigen::LLT<Eigen::MatrixXd> schur_llt;
    if (w.m > 0) {
      schur_llt.compute(schur);
      if (schur_llt.info() != Eigen::Success) {
        const double reg =
            1e-12 * std::max(1.0, schur.trace() / static_cast<double>(w.m));
        schur_llt.compute(schur +
                          reg * Eigen::MatrixXd::Identity(w.m, w.m));
        if (schur_llt.info() != Eigen::Success) {
          sol.status = SdpStatus::NumericalTrouble;
          sol.x = x;
          sol.yvec = y;
          sol.z = z;
          return sol;
        }
      }
    }

    const BlockMatrix w_rd_w = nt.congruence_w(rd);
    const Eigen::VectorXd a_wrdw = apply_a(p.a, w_rd_w);

    // Predictor (affine scaling, sigma = 0):
    //   S dy = b + A(W Rd W);  dZ = Rd - A*(dy);  dX = -X - W dZ W.
    Eigen::VectorXd dy_aff(w.m);
    if (w.m > 0) dy_aff = schur_llt.solve(p.b + a_wrdw);
    BlockMatrix dz_aff = rd;
    dz_aff.axpy(-1.0, apply_at(p.a, dy_aff, dims));
    BlockMatrix dx_aff = nt.congruence_w(dz_aff);
    dx_aff.scale(-1.0);
    dx_aff.axpy(-1.0, x);

    const double ap_aff =
        std::min(1.0, opts.step_frac * max_step(lx, dx_aff));
    const double ad_aff =
        std::min(1.0, opts.step_frac * max_step(lz, dz_aff));

    BlockMatrix x_probe = x;
    x_probe.axpy(ap_aff, dx_aff);
    BlockMatrix z_probe = z;
    z_probe.axpy(ad_aff, dz_aff);
    const double mu_aff = std::max(0.0, x_probe.inner(z_probe)) / n;
    double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, 1e-6, 0.99);

    // Corrector: target in scaled coordinates is
    //   sigma*mu*I - Sigma^2 - sym(dXhat_aff dZhat_aff).
    const BlockMatrix dxh = nt.to_scaled_x(dx_aff);
    const BlockMatrix dzh = nt.to_scaled_z(dz_aff);
    BlockMatrix target;
    target.blocks.resize(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) {
      const auto& s = nt.sigma[k];
      Eigen::MatrixXd cross = dxh.blocks[k] * dzh.blocks[k];
      Eigen::MatrixXd blk = -0.5 * (cross + cross.transpose());
      blk.diagonal() += (sigma * mu - s.array().square()).matrix();
      target.blocks[k] = blk;
    }
    const BlockMatrix d_corr = nt.lyapunov_unscale(target);

    Eigen::VectorXd dy(w.m);
    if (w.m > 0) dy = schur_llt.solve(rp - apply_a(p.a, d_corr) + a_wrdw);
    BlockMatrix dz = rd;
    dz.axpy(-1.0, apply_at(p.a, dy, dims));
    BlockMatrix dx = d_corr;
    dx.axpy(-1.0, nt.congruence_w(dz));

    const double ap = std::min(1.0, opts.step_frac * max_step(lx, dx));
    const double ad = std::min(1.0, opts.step_frac * max_step(lz, dz));

    if (ap < 1e-10 && ad < 1e-10) {
      if (++tiny_steps >= 3) {
        sol.status = SdpStatus::NumericalTrouble;
        sol.x = x;
        sol.yvec = y;
        sol.z = z;
        return sol;
      }
    } else {
      tiny_steps = 0;
    }

    x.axpy(ap, dx);
    x.symmetrize();
    y += ad * dy;
    z.axpy(ad, dz);
    z.symmetrize();
  }

  sol.status = SdpStatus::IterLimit;
  sol.x = x;
  sol.yvec = y;
  sol.z = z;
  sol.primal_obj = p.c.inner(x);
  sol.dual_obj = w.m > 0 ? p.b.dot(y) : 0.0;
  sol.iterations = opts.max_iter;
  return sol;
}

SdpResiduals residuals(const SdpProblem& p, const SdpSolution& s) {
  SdpResiduals r;
  const Eigen::Index m = p.b.size();
  for (Eigen::Index i = 0; i < m; ++i)
    r.primal_infeas =
        std::max(r.primal_infeas,
                 std::abs(p.a[static_cast<size_t>(i)].inner(s.x) - p.b(i)));
  BlockMatrix slack = p.c;
  slack.axpy(-1.0, apply_at(p.a, s.yvec, p.block_dims));
  slack.axpy(-1.0, s.z);
  r.dual_infeas = slack.max_abs();
  r.duality_gap = std::abs(p.c.inner(s.x) - (m > 0 ? p.b.dot(s.yvec) : 0.0));
  return r;
}

namespace {

void write_sdpa_entries(std::ostream& os, int mat_no,
                        const BlockMatrix& m) {
  for (size_t k = 0; k < m.blocks.size(); ++k) {
    const auto& blk = m.blocks[k];
    for (Eigen::Index i = 0; i < blk.rows(); ++i)
      for (Eigen::Index j = i; j < blk.cols(); ++j)
        if (blk(i, j) != 0.0)
          os << mat_no << " " << (k + 1) << " " << (i + 1) << " " << (j + 1)
             << " " << fmt_double(blk(i, j)) << "\n";
  }
}

}  // namespace

void write_sdpa(std::ostream& os, const SdpProblem& p) {
  os << p.b.size() << "\n";
  os << p.block_dims.size() << "\n";
  for (size_t k = 0; k < p.block_dims.size(); ++k)
    os << p.block_dims[k] << (k + 1 < p.block_dims.size() ? " " : "\n");
  if (p.block_dims.empty()) os << "\n";
  for (Eigen::Index i = 0; i < p.b.size(); ++i)
    os << fmt_double(p.b(i)) << (i + 1 < p.b.size() ? " " : "");
  os << "\n";
  BlockMatrix f0 = p.c;
  f0.scale(-1.0);
  write_sdpa_entries(os, 0, f0);
  for (size_t i = 0; i < p.a.size(); ++i)
    write_sdpa_entries(os, static_cast<int>(i + 1), p.a[i]);
}

}  // namespace msos::sdp
