#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace msos::sdp {

/// Block-diagonal symmetric matrix; blocks align with SdpProblem::block_dims.
struct BlockMatrix {
  std::vector<Eigen::MatrixXd> blocks;

  static BlockMatrix zero(const std::vector<int>& dims);
  static BlockMatrix identity(const std::vector<int>& dims, double scale = 1.0);

  double inner(const BlockMatrix& o) const;  // trace inner product
  double max_abs() const;
  double frob_norm() const;
  BlockMatrix& axpy(double a, const BlockMatrix& o);  // *this += a * o
  BlockMatrix& scale(double a);
  void symmetrize();
};

/// Standard-form semidefinite program:
///   minimize   <C, X>
///   subject to <A_i, X> = b_i  (i = 1..m),  X >= 0 block-diagonal.
/// The dual reads  maximize b.y  s.t.  Z = C - sum_i y_i A_i >= 0.
struct SdpProblem {
  std::vector<int> block_dims;
  BlockMatrix c;
  std::vector<BlockMatrix> a;
  Eigen::VectorXd b;

  int total_dim() const;
  /// Throws std::invalid_argument on shape or symmetry violations.
  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalTrouble };

std::string to_string(SdpStatus s);

struct SdpIterInfo {
  int iter = 0;
  double mu = 0.0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_infeas = 0.0;  // relative
  double dual_infeas = 0.0;    // relative
};

struct SdpOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double step_frac = 0.98;  // fraction-to-boundary
  std::function<void(const SdpIterInfo&)> trace;  // per-iteration callback
};

struct SdpSolution {
  BlockMatrix x;
  Eigen::VectorXd yvec;
  BlockMatrix z;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  SdpStatus status = SdpStatus::NumericalTrouble;
  int iterations = 0;
};

/// Primal-dual path-following with Nesterov-Todd scaling and a
/// Mehrotra-style predictor-corrector; dense Cholesky on the Schur
/// complement. Non-convergence is reported through `status`, never thrown.
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

struct SdpResiduals {
  double primal_infeas = 0.0;  // max_i |<A_i,X> - b_i|
  double dual_infeas = 0.0;    // max-norm of Z - (C - sum y_i A_i)
  double duality_gap = 0.0;    // |<C,X> - b.y|
};

SdpResiduals residuals(const SdpProblem& p, const SdpSolution& s);

/// Emit the problem in SDPA sparse format (.dat-s). The equality-form
/// problem maps onto SDPA's dual: F_0 = -C, F_i = A_i, c = b, so SDPA's
/// (D) side is this problem with its objective negated.
void write_sdpa(std::ostream& os, const SdpProblem& p);

}  // namespace msos::sdp
