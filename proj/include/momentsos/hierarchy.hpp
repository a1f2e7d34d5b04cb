#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "momentsos/moment.hpp"
#include "momentsos/quadmod.hpp"
#include "momentsos/sdp.hpp"

namespace msos {

/// Order-t moment relaxation of min f over P(Q), in standard form.
/// The SDP multiplier vector parametrizes the pseudo-moments (y_0 = 1 is
/// substituted into the constant block), and the matrix variable holds the
/// sums-of-squares Gram blocks, one per weight in [1, q0, q1, ..., qn].
struct Relaxation {
  sdp::SdpProblem problem;
  int t = 0;
  std::vector<Exponent> moments;  // basis of degree <= 2t; moments[0] is the
                                  // unit exponent, moments[k] pairs with
                                  // constraint k-1 / multiplier y_{k-1}
  std::vector<std::vector<Exponent>> block_bases;
  std::vector<Poly> block_weights;  // [1, q0, q1, ..., qn]
  double objective_const = 0.0;     // coefficient of f at the unit exponent
};

Relaxation build_relaxation(const Poly& f, const QuadraticModule& Q, int t);

struct RelaxationResult {
  int t = 0;
  sdp::SdpStatus sdp_status = sdp::SdpStatus::NumericalTrouble;
  std::optional<double> lower_bound;       // undefined unless Optimal
  std::optional<MomentSequence> y;         // pseudo-moments up to degree 2t
  std::vector<Eigen::MatrixXd> gram;       // dual Gram blocks
  std::vector<std::vector<Exponent>> gram_bases;
  std::vector<Poly> gram_weights;          // [1, q0, q1, ..., qn]
  bool flat = false;
  int rank_t = -1;
  int rank_prev = -1;
  int iterations = 0;
};

enum class StopReason { FlatnessReached, GapClosed, MaxOrder, SolverFailure };

std::string to_string(StopReason r);

struct HierarchyReport {
  std::vector<RelaxationResult> results;
  std::optional<double> best_bound;
  StopReason stop_reason = StopReason::SolverFailure;

  /// Last result with an Optimal solve, if any.
  const RelaxationResult* best_result() const;
};

struct HierarchyOptions {
  sdp::SdpOptions sdp;
  double flat_tol = 1e-6;
  double stall_tol = 1e-7;  // |lambda_{t+1} - lambda_t| threshold; two
                            // consecutive hits stop the run
  std::ostream* progress = nullptr;
};

RelaxationResult solve_order(const Poly& f, const QuadraticModule& Q, int t,
                             const HierarchyOptions& opts = {});

HierarchyReport run(const Poly& f, const QuadraticModule& Q, int t_min,
                    int t_max, const HierarchyOptions& opts = {});

}  // namespace msos
