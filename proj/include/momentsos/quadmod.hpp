#pragma once

#include <functional>
#include <vector>

#include "momentsos/polyalg.hpp"

namespace msos {

/// Finitely generated archimedean quadratic module Q in A: the ball witness
/// q0 = nf(1 - eps * sum of squared variables) followed by user generators
/// q1..qn, all in normal form over `relations`.
struct QuadraticModule {
  VarSpace space;
  RelationSet relations;
  Poly ball;                    // q0, the archimedean witness
  std::vector<Poly> generators; // q1..qn
  double radius_sq = 1.0;       // 1/eps

  /// [q0, q1, ..., qn] — the generator list with the ball first.
  std::vector<Poly> all_generators() const;
};

QuadraticModule make_archimedean(const VarSpace& space,
                                 const RelationSet& relations,
                                 const std::vector<Poly>& generators,
                                 double epsilon);

/// Concrete Borel realizations h_j: R^d -> R of the measurable generators.
/// Used only by sampling and oracle code, never by the relaxation. Callables
/// must be stateless (safe for concurrent calls).
struct MeasurableEvaluator {
  std::vector<std::function<double(const std::vector<double>&)>> h;
};

/// Uniform lattice lo + k*step per coordinate, k = 0.. while <= hi.
struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  double step = 0.01;

  static GridSpec covering(double radius, int points_per_dim);
  std::vector<double> axis() const;
};

/// Lifted grid points (x, h1(x), ..., hm(x)) at which every generator of Q
/// evaluates >= -tol.
struct FeasibleSample {
  std::vector<std::vector<double>> points;
  int skipped = 0;  // grid points dropped because an evaluator failed
};

FeasibleSample sample_positivity_set(const QuadraticModule& Q,
                                     const MeasurableEvaluator& ev,
                                     const GridSpec& grid, double tol = 1e-9);

double min_on_sample(const Poly& f, const FeasibleSample& sample);

}  // namespace msos
