#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "momentsos/polyalg.hpp"

namespace msos {

/// Pseudo-moment sequence: a value y_e for every normal-form exponent e of
/// degree <= max_degree, with y at the zero exponent the total mass. The
/// Riesz functional L maps a polynomial to sum coeff * y_e over its normal
/// form.
class MomentSequence {
 public:
  MomentSequence(VarSpace space, RelationSet relations, int max_degree);

  /// Moments of the atomic measure sum_i weights[i] * delta(points[i]).
  /// Points live in R^{d+m} (lifted coordinates) and should satisfy the
  /// relation set for the sequence to be consistent.
  static MomentSequence from_atoms(
      const VarSpace& space, const RelationSet& relations, int max_degree,
      const std::vector<std::vector<double>>& points,
      const std::vector<double>& weights);

  const VarSpace& space() const { return space_; }
  const RelationSet& relations() const { return relations_; }
  int max_degree() const { return max_degree_; }

  void set(const Exponent& e, double v);
  double at(const Exponent& e) const;  // throws if e is undefined
  bool has(const Exponent& e) const { return values_.count(e) > 0; }

  /// L(p) = sum over the normal form of p of coeff * y_e.
  double riesz(const Poly& p) const;

 private:
  double riesz_normal(const Poly& p_normal) const;

  VarSpace space_;
  RelationSet relations_;
  int max_degree_;
  std::map<Exponent, double> values_;
};

struct MomentMatrix {
  std::vector<Exponent> basis;  // normal-form monomials, degree <= t
  Eigen::MatrixXd mat;          // M[u,v] = L(nf(mono_u * mono_v))
};

struct LocalizingMatrix {
  int generator_index = -1;     // caller-assigned label
  std::vector<Exponent> basis;  // degree <= t - ceil(deg q / 2)
  Eigen::MatrixXd mat;          // M[u,v] = L(nf(mono_u * mono_v * q))
};

MomentMatrix moment_matrix(const MomentSequence& y, int t);

LocalizingMatrix localizing_matrix(const MomentSequence& y, const Poly& q,
                                   int t, int generator_index = -1);

/// Count of eigenvalues exceeding tol * max(1, lambda_max).
int numerical_rank(const Eigen::MatrixXd& sym, double tol);

/// Flat at order t when rank M_t = rank M_{t-1}; requires t >= 1.
bool is_flat(const MomentSequence& y, int t, double tol = 1e-6);

/// The two ranks behind the flatness test, (rank M_t, rank M_{t-1}).
std::pair<int, int> flatness_ranks(const MomentSequence& y, int t, double tol);

}  // namespace msos
