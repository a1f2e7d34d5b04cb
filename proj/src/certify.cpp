#include "momentsos/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace msos {

// Shared by extraction and the independent audit.
static Poly certificate_residual(const Poly& f, const Certificate& cert,
                                 const QuadraticModule& Q) {
  std::vector<Poly> weights;
  weights.push_back(Poly::constant(Q.space, 1.0));
  for (const auto& g : Q.all_generators()) weights.push_back(g);
  if (cert.sos.size() > weights.size())
    throw std::invalid_argument(
        "certificate has more sigma blocks than the module has weights");

  Poly acc = normal_form(f, Q.relations) - Poly::constant(Q.space, cert.lambda);
  for (size_t i = 0; i < cert.sos.size(); ++i) {
    Poly sigma(Q.space);
    for (const auto& root : cert.sos[i]) sigma += root * root;
    acc -= weights[i] * sigma;
  }
  return normal_form(acc, Q.relations);
}

Certificate extract_certificate(const RelaxationResult& result, const Poly& f,
                                const QuadraticModule& Q, double eig_clip) {
  if (result.sdp_status != sdp::SdpStatus::Optimal || !result.lower_bound)
    throw std::invalid_argument(
        "extract_certificate: relaxation is not Optimal");
  if (result.gram.size() != result.gram_bases.size())
    throw std::invalid_argument("extract_certificate: missing Gram blocks");

  Certificate cert;
  cert.lambda = *result.lower_bound;
  cert.sos.resize(result.gram.size());

  for (size_t blk = 0; blk < result.gram.size(); ++blk) {
    const Eigen::MatrixXd& g = result.gram[blk];
    const auto& basis = result.gram_bases[blk];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const auto& vals = es.eigenvalues();
    const double lmax = vals.size() > 0 ? vals.maxCoeff() : 0.0;
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
      double lam = vals(k);
      if (lam < -eig_clip)
        throw std::runtime_error(
            "extract_certificate: Gram block " + std::to_string(blk) +
            " has eigenvalue " + fmt_double(lam) + " below -" +
            fmt_double(eig_clip));
      lam = std::max(lam, 0.0);
      if (lam <= 1e-13 * std::max(1.0, lmax)) continue;
      Poly root(Q.space);
      const double scale = std::sqrt(lam);
      for (size_t u = 0; u < basis.size(); ++u)
        root.add_term(basis[u], scale * es.eigenvectors()(
                                            static_cast<Eigen::Index>(u), k));
      if (!root.is_zero()) cert.sos[blk].push_back(std::move(root));
    }
  }

  cert.residual = certificate_residual(f, cert, Q);
  cert.residual_norm = cert.residual->max_abs_coeff();
  return cert;
}

double verify_certificate(const Poly& f, const Certificate& cert,
                          const QuadraticModule& Q) {
  return certificate_residual(f, cert, Q).max_abs_coeff();
}

GnsOperators gns_operators(const MomentSequence& y, int t, double rank_tol) {
  if (t < 1) throw std::invalid_argument("gns_operators: need t >= 1");
  if (2 * t > y.max_degree())
    throw std::invalid_argument("gns_operators: moment data to degree 2t "
                                "required");

  GnsOperators out;
  const MomentMatrix m_prev = moment_matrix(y, t - 1);
  out.basis = m_prev.basis;
  out.gram = m_prev.mat;
  const int n = static_cast<int>(out.basis.size());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.gram);
  const auto& vals = es.eigenvalues();
  const double cutoff = rank_tol * std::max(1.0, vals.maxCoeff());
  out.rank = 0;
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    if (vals(k) > cutoff) ++out.rank;
  if (out.rank == 0)
    throw std::runtime_error(
        "gns_operators: moment matrix numerically zero (degenerate "
        "functional)");

  // Orthonormal basis of the retained column space: P = V_r D_r^{-1/2},
  // so P^T M P = I.
  out.reducer.resize(n, out.rank);
  for (int kk = 0; kk < out.rank; ++kk) {
    const Eigen::Index src = vals.size() - 1 - kk;
    out.reducer.col(kk) =
        es.eigenvectors().col(src) / std::sqrt(vals(src));
  }

  const int nvars = y.space().size();
  out.ops.reserve(static_cast<size_t>(nvars));
  for (int v = 0; v < nvars; ++v) {
    // Shift matrix S_v[u,w] = L(nf(mono_u * mono_w * x_v)).
    Eigen::MatrixXd shift(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Exponent e = out.basis[static_cast<size_t>(i)] +
                           out.basis[static_cast<size_t>(j)] +
                           Exponent::unit(nvars, v);
        const double val = y.riesz(Poly::monomial(y.space(), e));
        shift(i, j) = val;
        shift(j, i) = val;
      }
    Eigen::MatrixXd op = out.reducer.transpose() * shift * out.reducer;
    const double asym = (op - op.transpose()).cwiseAbs().maxCoeff();
    out.max_asymmetry = std::max(out.max_asymmetry, asym);
    out.ops.push_back(((op + op.transpose()) * 0.5).eval());
  }

  for (size_t i = 0; i < out.ops.size(); ++i)
    for (size_t j = i + 1; j < out.ops.size(); ++j) {
      const double comm =
          (out.ops[i] * out.ops[j] - out.ops[j] * out.ops[i]).norm();
      out.max_commutator = std::max(out.max_commutator, comm);
    }
  return out;
}

AtomSet extract_atoms(const GnsOperators& ops, const QuadraticModule& Q,
                      const ExtractOptions& opts) {
  const int r = ops.rank;
  const int nvars = static_cast<int>(ops.ops.size());
  if (r == 0 || nvars == 0)
    throw std::runtime_error("extract_atoms: no operators");

  AtomSet out;
  out.reliable = ops.max_commutator <= opts.commute_tol;

  // Seeded random combination; generic coefficients separate the joint
  // eigenspaces.
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd coeffs(nvars);
  for (int v = 0; v < nvars; ++v) coeffs(v) = gauss(rng);
  coeffs.normalize();

  Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(r, r);
  for (int v = 0; v < nvars; ++v) combo += coeffs(v) * ops.ops[v];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(combo);

  for (int k = 0; k < r; ++k) {
    const Eigen::VectorXd u = es.eigenvectors().col(k);
    Atom atom;
    atom.point.resize(static_cast<size_t>(nvars));
    for (int v = 0; v < nvars; ++v)
      atom.point[static_cast<size_t>(v)] = u.dot(ops.ops[v] * u);
    out.atoms.push_back(std::move(atom));
  }

  // Weights from the moment-matching system: the first Gram column holds
  // y_e over the basis, and each atom contributes weight * point^e.
  const int n = static_cast<int>(ops.basis.size());
  Eigen::MatrixXd vander(n, r);
  for (int row = 0; row < n; ++row) {
    const Exponent& e = ops.basis[static_cast<size_t>(row)];
    for (int k = 0; k < r; ++k) {
      double mono = 1.0;
      for (int v = 0; v < nvars; ++v)
        for (int rep = 0; rep < e[v]; ++rep)
          mono *= out.atoms[static_cast<size_t>(k)].point[static_cast<size_t>(v)];
      vander(row, k) = mono;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      vander, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-8 * std::max(1.0, sv(0)))
    throw std::runtime_error(
        "extract_atoms: weight system singular (coincident atoms?)");
  const Eigen::VectorXd weights = svd.solve(ops.gram.col(0));

  for (int k = 0; k < r; ++k) {
    out.atoms[static_cast<size_t>(k)].weight = weights(k);
    out.total_weight += weights(k);
    if (weights(k) <= 0.0) out.reliable = false;
  }

  std::sort(out.atoms.begin(), out.atoms.end(),
            [](const Atom& a, const Atom& b) { return a.point < b.point; });

  for (const auto& atom : out.atoms)
    for (const auto& g : Q.all_generators())
      out.max_generator_violation = std::max(
          out.max_generator_violation, std::max(0.0, -g.eval(atom.point)));
  return out;
}

}  // namespace msos
