#include "momentsos/moment.hpp"

#include <cmath>
#include <stdexcept>

namespace msos {

MomentSequence::MomentSequence(VarSpace space, RelationSet relations,
                               int max_degree)
    : space_(std::move(space)),
      relations_(std::move(relations)),
      max_degree_(max_degree) {
  if (max_degree_ < 0)
    throw std::invalid_argument("MomentSequence: negative max_degree");
  if (!(relations_.space() == space_))
    throw std::invalid_argument("MomentSequence: relation space mismatch");
}

MomentSequence MomentSequence::from_atoms(
    const VarSpace& space, const RelationSet& relations, int max_degree,
    const std::vector<std::vector<double>>& points,
    const std::vector<double>& weights) {
  if (points.size() != weights.size())
    throw std::invalid_argument("from_atoms: points/weights size mismatch");
  MomentSequence y(space, relations, max_degree);
  for (const Exponent& e : monomial_basis(space, relations, max_degree)) {
    double v = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (p.size() != static_cast<size_t>(space.size()))
        throw std::invalid_argument("from_atoms: point length mismatch");
      double mono = 1.0;
      for (int k = 0; k < e.size(); ++k)
        for (int rep = 0; rep < e[k]; ++rep) mono *= p[static_cast<size_t>(k)];
      v += weights[i] * mono;
    }
    y.set(e, v);
  }
  return y;
}

void MomentSequence::set(const Exponent& e, double v) {
  if (e.size() != space_.size())
    throw std::invalid_argument("MomentSequence::set: exponent length");
  values_[e] = v;
}

double MomentSequence::at(const Exponent& e) const {
  auto it = values_.find(e);
  if (it == values_.end())
    throw std::out_of_range("MomentSequence: exponent of degree " +
                            std::to_string(e.degree()) +
                            " beyond max_degree " + std::to_string(max_degree_));
  return it->second;
}

double MomentSequence::riesz(const Poly& p) const {
  return riesz_normal(normal_form(p, relations_));
}

double MomentSequence::riesz_normal(const Poly& p_normal) const {
  double acc = 0.0;
  for (const auto& [e, c] : p_normal.terms()) acc += c * at(e);
  return acc;
}

MomentMatrix moment_matrix(const MomentSequence& y, int t) {
  if (t < 0) throw std::invalid_argument("moment_matrix: negative order");
  if (2 * t > y.max_degree())
    throw std::invalid_argument("moment_matrix: 2t exceeds max_degree");
  MomentMatrix out;
  out.basis = monomial_basis(y.space(), y.relations(), t);
  const int n = static_cast<int>(out.basis.size());
  out.mat.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Poly prod = normal_form(
          Poly::monomial(y.space(), out.basis[static_cast<size_t>(i)] +
                                        out.basis[static_cast<size_t>(j)]),
          y.relations());
      double v = 0.0;
      for (const auto& [e, c] : prod.terms()) v += c * y.at(e);
      out.mat(i, j) = v;
      out.mat(j, i) = v;
    }
  return out;
}

LocalizingMatrix localizing_matrix(const MomentSequence& y, const Poly& q,
                                   int t, int generator_index) {
  const Poly qn = normal_form(q, y.relations());
  const int dq = qn.degree();
  const int td = t - (dq + 1) / 2;
  if (td < 0)
    throw std::invalid_argument("localizing_matrix: order too small for q");
  if (2 * td + dq > y.max_degree())
    throw std::invalid_argument("localizing_matrix: 2(t-ceil(deg q/2)) + deg q "
                                "exceeds max_degree");
  LocalizingMatrix out;
  out.generator_index = generator_index;
  out.basis = monomial_basis(y.space(), y.relations(), td);
  const int n = static_cast<int>(out.basis.size());
  out.mat.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Poly prod = normal_form(
          Poly::monomial(y.space(), out.basis[static_cast<size_t>(i)] +
                                        out.basis[static_cast<size_t>(j)]) *
              qn,
          y.relations());
      double v = 0.0;
      for (const auto& [e, c] : prod.terms()) v += c * y.at(e);
      out.mat(i, j) = v;
      out.mat(j, i) = v;
    }
  return out;
}

int numerical_rank(const Eigen::MatrixXd& sym, double tol) {
  if (sym.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double cutoff = tol * std::max(1.0, ev(ev.size() - 1));
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) ++rank;
  return rank;
}

std::pair<int, int> flatness_ranks(const MomentSequence& y, int t,
                                   double tol) {
  if (t < 1) throw std::invalid_argument("flatness requires t >= 1");
  const int rank_t = numerical_rank(moment_matrix(y, t).mat, tol);
  const int rank_prev = numerical_rank(moment_matrix(y, t - 1).mat, tol);
  return {rank_t, rank_prev};
}

bool is_flat(const MomentSequence& y, int t, double tol) {
  auto [rank_t, rank_prev] = flatness_ranks(y, t, tol);
  return rank_t == rank_prev;
}

}  // namespace msos
