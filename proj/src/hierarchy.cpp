#include "momentsos/hierarchy.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace msos {

namespace {

int required_min_order(const Poly& f, const QuadraticModule& Q) {
  int deg = f.degree();
  deg = std::max(deg, Q.ball.degree());
  for (const auto& g : Q.generators) deg = std::max(deg, g.degree());
  return (deg + 1) / 2;
}

std::string fmt_bound(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", *v);
  return buf;
}

}  // namespace

Relaxation build_relaxation(const Poly& f, const QuadraticModule& Q, int t) {
  if (!(f.space() == Q.space))
    throw std::invalid_argument("build_relaxation: objective space mismatch");
  if (t < required_min_order(f, Q))
    throw std::invalid_argument(
        "build_relaxation: order too small, need 2t >= max degree of the "
        "objective and every generator (t >= " +
        std::to_string(required_min_order(f, Q)) + ")");

  const Poly fn = normal_form(f, Q.relations);

  Relaxation rel;
  rel.t = t;
  rel.moments = monomial_basis(Q.space, Q.relations, 2 * t);
  std::map<Exponent, int> index;
  for (size_t k = 0; k < rel.moments.size(); ++k)
    index.emplace(rel.moments[k], static_cast<int>(k));

  rel.block_weights.push_back(Poly::constant(Q.space, 1.0));
  for (const auto& g : Q.all_generators()) rel.block_weights.push_back(g);
  for (const auto& wpoly : rel.block_weights) {
    const int td = t - (wpoly.degree() + 1) / 2;
    rel.block_bases.push_back(monomial_basis(Q.space, Q.relations, td));
  }

  auto& sdp = rel.problem;
  for (const auto& basis : rel.block_bases)
    sdp.block_dims.push_back(static_cast<int>(basis.size()));
  const int n_moments = static_cast<int>(rel.moments.size());
  const int n_vars = n_moments - 1;

  sdp.c = sdp::BlockMatrix::zero(sdp.block_dims);
  sdp.a.assign(static_cast<size_t>(n_vars),
               sdp::BlockMatrix::zero(sdp.block_dims));
  sdp.b = Eigen::VectorXd::Zero(n_vars);

  // Entry (u,v) of block w is L(nf(mono_u * mono_v * w)) = sum_e c_e y_e.
  // With y_0 = 1 substituted, the e = 0 part lands in C and the rest in
  // A_e = -B_e so that the dual slack reproduces the block LMI.
  for (size_t blk = 0; blk < rel.block_bases.size(); ++blk) {
    const auto& basis = rel.block_bases[blk];
    const auto& wpoly = rel.block_weights[blk];
    const int nb = static_cast<int>(basis.size());
    for (int i = 0; i < nb; ++i)
      for (int j = i; j < nb; ++j) {
        const Poly entry = normal_form(
            Poly::monomial(Q.space, basis[static_cast<size_t>(i)] +
                                        basis[static_cast<size_t>(j)]) *
                wpoly,
            Q.relations);
        for (const auto& [e, coef] : entry.terms()) {
          const int k = index.at(e);
          auto put = [&](sdp::BlockMatrix& mat, double v) {
            mat.blocks[blk](i, j) += v;
            if (i != j) mat.blocks[blk](j, i) += v;
          };
          if (k == 0)
            put(sdp.c, coef);
          else
            put(sdp.a[static_cast<size_t>(k - 1)], -coef);
        }
      }
  }

  rel.objective_const = fn.constant_term();
  for (const auto& [e, coef] : fn.terms()) {
    const auto it = index.find(e);
    if (it == index.end())
      throw std::invalid_argument("build_relaxation: objective degree "
                                  "exceeds 2t after reduction");
    if (it->second > 0) sdp.b(it->second - 1) = -coef;
  }
  return rel;
}

RelaxationResult solve_order(const Poly& f, const QuadraticModule& Q, int t,
                             const HierarchyOptions& opts) {
  const Relaxation rel = build_relaxation(f, Q, t);
  const sdp::SdpSolution sol = sdp::solve(rel.problem, opts.sdp);

  RelaxationResult res;
  res.t = t;
  res.sdp_status = sol.status;
  res.iterations = sol.iterations;
  res.gram_bases = rel.block_bases;
  res.gram_weights = rel.block_weights;

  if (sol.status != sdp::SdpStatus::Optimal) return res;

  MomentSequence y(Q.space, Q.relations, 2 * t);
  y.set(rel.moments[0], 1.0);
  for (size_t k = 1; k < rel.moments.size(); ++k)
    y.set(rel.moments[k], sol.yvec(static_cast<Eigen::Index>(k - 1)));

  res.lower_bound = y.riesz(f);
  res.gram.reserve(sol.x.blocks.size());
  for (const auto& blk : sol.x.blocks) res.gram.push_back(blk);

  auto [rank_t, rank_prev] = flatness_ranks(y, t, opts.flat_tol);
  res.rank_t = rank_t;
  res.rank_prev = rank_prev;
  res.flat = (rank_t == rank_prev);
  res.y = std::move(y);
  return res;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::FlatnessReached: return "FlatnessReached";
    case StopReason::GapClosed: return "GapClosed";
    case StopReason::MaxOrder: return "MaxOrder";
    case StopReason::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

const RelaxationResult* HierarchyReport::best_result() const {
  for (auto it = results.rbegin(); it != results.rend(); ++it)
    if (it->sdp_status == sdp::SdpStatus::Optimal) return &*it;
  return nullptr;
}

HierarchyReport run(const Poly& f, const QuadraticModule& Q, int t_min,
                    int t_max, const HierarchyOptions& opts) {
  if (t_min > t_max)
    throw std::invalid_argument("run: t_min must not exceed t_max");

  HierarchyReport report;
  std::optional<double> prev_bound;
  int stall_count = 0;

  for (int t = t_min; t <= t_max; ++t) {
    RelaxationResult res = solve_order(f, Q, t, opts);

    if (opts.progress) {
      *opts.progress << "t=" << t << " bound=" << fmt_bound(res.lower_bound)
                     << " status=" << sdp::to_string(res.sdp_status)
                     << " flat=" << (res.flat ? "true" : "false") << " rank=";
      if (res.rank_t >= 0)
        *opts.progress << res.rank_t << "/" << res.rank_prev;
      else
        *opts.progress << "-/-";
      *opts.progress << "\n";
    }

    const bool optimal = res.sdp_status == sdp::SdpStatus::Optimal;
    if (optimal) {
      if (!report.best_bound || *res.lower_bound > *report.best_bound)
        report.best_bound = res.lower_bound;
      if (prev_bound &&
          std::abs(*res.lower_bound - *prev_bound) <= opts.stall_tol)
        ++stall_count;
      else
        stall_count = 0;
      prev_bound = res.lower_bound;
    }
    const bool flat_stop = optimal && res.flat;
    report.results.push_back(std::move(res));

    if (flat_stop) {
      report.stop_reason = StopReason::FlatnessReached;
      return report;
    }
    if (stall_count >= 2) {
      report.stop_reason = StopReason::GapClosed;
      return report;
    }
  }
  report.stop_reason =
      report.best_bound ? StopReason::MaxOrder : StopReason::SolverFailure;
  return report;
}

}  // namespace msos
