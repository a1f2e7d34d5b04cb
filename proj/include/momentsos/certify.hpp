#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "momentsos/hierarchy.hpp"
#include "momentsos/moment.hpp"
#include "momentsos/quadmod.hpp"

namespace msos {

/// Weighted sums-of-squares certificate
///   f - lambda ~ sigma_0 + q0 sigma_1 + ... + qn sigma_{n+1},
/// sigma_i = sum_j g_ij^2. Index i aligns with [1, q0, q1, ..., qn].
struct Certificate {
  double lambda = 0.0;
  std::vector<std::vector<Poly>> sos;  // sos[i] = square roots g_ij
  std::optional<Poly> residual;        // nf(f - lambda - sum_i w_i sigma_i);
                                       // absent until computed against a
                                       // module
  double residual_norm = 0.0;          // max |coefficient| of residual
};

/// Factor the dual Gram blocks of an Optimal relaxation into square-root
/// polynomials and assemble the certificate. Eigenvalues in [-eig_clip, 0)
/// are clipped to zero; anything below -eig_clip raises a numeric-quality
/// error.
Certificate extract_certificate(const RelaxationResult& result, const Poly& f,
                                const QuadraticModule& Q,
                                double eig_clip = 1e-7);

/// Recompute nf(f - lambda - sum_i q_i sum_j g_ij^2) with fresh arithmetic
/// and return its max coefficient magnitude. Trusts nothing stored in the
/// certificate beyond lambda and the g_ij.
double verify_certificate(const Poly& f, const Certificate& cert,
                          const QuadraticModule& Q);

/// Truncated GNS multiplication operators: for each variable v, the matrix
/// of "multiply by v, project back" on the rank-truncated column space of
/// M_{t-1}, expressed in an orthonormal basis of that space.
struct GnsOperators {
  std::vector<Exponent> basis;        // degree <= t-1 normal-form monomials
  Eigen::MatrixXd gram;               // M_{t-1}
  Eigen::MatrixXd reducer;            // N x r, columns orthonormal wrt gram
  std::vector<Eigen::MatrixXd> ops;   // d+m symmetric r x r matrices
  int rank = 0;
  double max_asymmetry = 0.0;   // worst self-adjointness defect before
                                // symmetrization
  double max_commutator = 0.0;  // worst pairwise ||[ops_i, ops_j]||_F
};

GnsOperators gns_operators(const MomentSequence& y, int t,
                           double rank_tol = 1e-6);

struct Atom {
  std::vector<double> point;  // in R^{d+m}
  double weight = 0.0;
};

struct AtomSet {
  std::vector<Atom> atoms;
  double total_weight = 0.0;
  double max_generator_violation = 0.0;  // max over atoms/generators of
                                         // max(0, -q_i(atom))
  bool reliable = true;  // false when the operators fail to commute within
                         // tolerance or a weight came out nonpositive
};

struct ExtractOptions {
  std::uint32_t seed = 20240901;  // for the random operator combination
  double commute_tol = 1e-5;
};

/// Simultaneous-diagonalization atom extraction: eigen-decompose a seeded
/// random combination of the operators, read coordinates as Rayleigh
/// quotients, recover weights from the moment-matching system against the
/// first column of the Gram matrix.
AtomSet extract_atoms(const GnsOperators& ops, const QuadraticModule& Q,
                      const ExtractOptions& opts = {});

}  // namespace msos
