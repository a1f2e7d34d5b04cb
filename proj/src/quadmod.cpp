#include "momentsos/quadmod.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msos {

std::vector<Poly> QuadraticModule::all_generators() const {
  std::vector<Poly> all;
  all.reserve(generators.size() + 1);
  all.push_back(ball);
  all.insert(all.end(), generators.begin(), generators.end());
  return all;
}

QuadraticModule make_archimedean(const VarSpace& space,
                                 const RelationSet& relations,
                                 const std::vector<Poly>& generators,
                                 double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("make_archimedean: epsilon must be > 0");
  if (!(relations.space() == space))
    throw std::invalid_argument("make_archimedean: relation space mismatch");

  Poly sumsq(space);
  for (int i = 0; i < space.size(); ++i)
    sumsq.add_term(Exponent::unit(space.size(), i, 2), 1.0);
  Poly ball = normal_form(Poly::constant(space, 1.0) - sumsq * epsilon, relations);

  QuadraticModule q{space, relations, std::move(ball), {}, 1.0 / epsilon};
  q.generators.reserve(generators.size());
  for (const auto& g : generators) {
    if (!(g.space() == space))
      throw std::invalid_argument("make_archimedean: generator space mismatch");
    q.generators.push_back(normal_form(g, relations));
  }
  return q;
}

GridSpec GridSpec::covering(double radius, int points_per_dim) {
  if (points_per_dim < 2)
    throw std::invalid_argument("GridSpec: need at least 2 points per axis");
  return GridSpec{-radius, radius, 2.0 * radius / (points_per_dim - 1)};
}

std::vector<double> GridSpec::axis() const {
  if (!(step > 0.0) || hi < lo)
    throw std::invalid_argument("GridSpec: invalid range or step");
  std::vector<double> pts;
  // Half-step slack keeps the endpoint despite rounding.
  for (double v = lo; v <= hi + step / 2; v += step) pts.push_back(v);
  return pts;
}

FeasibleSample sample_positivity_set(const QuadraticModule& Q,
                                     const MeasurableEvaluator& ev,
                                     const GridSpec& grid, double tol) {
  const int d = Q.space.d;
  const int m = Q.space.m;
  if (static_cast<int>(ev.h.size()) != m)
    throw std::invalid_argument(
        "sample_positivity_set: need one evaluator per h-variable");

  const std::vector<double> axis = grid.axis();
  const std::vector<Poly> gens = Q.all_generators();

  FeasibleSample out;
  std::vector<double> x(static_cast<size_t>(d));
  std::vector<double> lifted(static_cast<size_t>(d + m));

  // Odometer over the d-dimensional lattice (a single empty point when d=0).
  std::vector<size_t> idx(static_cast<size_t>(d), 0);
  for (;;) {
    for (int i = 0; i < d; ++i) x[static_cast<size_t>(i)] = axis[idx[static_cast<size_t>(i)]];

    bool ok = true;
    for (int i = 0; i < d; ++i) lifted[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
    for (int j = 0; j < m && ok; ++j) {
      double hv;
      try {
        hv = ev.h[static_cast<size_t>(j)](x);
      } catch (...) {
        ok = false;
        break;
      }
      if (!std::isfinite(hv)) {
        ok = false;
        break;
      }
      lifted[static_cast<size_t>(d + j)] = hv;
    }
    if (!ok) {
      ++out.skipped;
    } else {
      bool feasible = true;
      for (const auto& g : gens)
        if (g.eval(lifted) < -tol) {
          feasible = false;
          break;
        }
      if (feasible) out.points.push_back(lifted);
    }

    int carry = d - 1;
    while (carry >= 0 && ++idx[static_cast<size_t>(carry)] == axis.size()) {
      idx[static_cast<size_t>(carry)] = 0;
      --carry;
    }
    if (carry < 0) break;
  }
  return out;
}

double min_on_sample(const Poly& f, const FeasibleSample& sample) {
  if (sample.points.empty())
    throw std::invalid_argument("min_on_sample: empty sample");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : sample.points) best = std::min(best, f.eval(p));
  return best;
}

}  // namespace msos
