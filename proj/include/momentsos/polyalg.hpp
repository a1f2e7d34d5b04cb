#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace msos {

/// Shortest decimal representation that round-trips the double exactly.
std::string fmt_double(double v);

/// Variable space of the algebra R[x1..xd, h1..hm]: d polynomial coordinates
/// followed by m measurable-generator variables.
struct VarSpace {
  int d = 0;
  int m = 0;
  std::vector<std::string> names;  // size d+m, unique

  VarSpace(int d, int m);
  VarSpace(int d, int m, std::vector<std::string> names);

  int size() const { return d + m; }
  bool is_x(int i) const { return i < d; }
  const std::string& name(int i) const { return names[static_cast<size_t>(i)]; }
  std::optional<int> index_of(std::string_view ident) const;

  bool operator==(const VarSpace& o) const = default;
};

/// Monomial exponent vector (alpha over the x-block, beta over the h-block).
/// Ordered graded-lexicographically: total degree first, then entry-wise
/// lexicographic with earlier variables most significant.
class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(int nvars) : e_(static_cast<size_t>(nvars), 0) {}
  Exponent(std::initializer_list<int> e) : e_(e) {}
  static Exponent unit(int nvars, int var, int power = 1);

  int size() const { return static_cast<int>(e_.size()); }
  int operator[](int i) const { return e_[static_cast<size_t>(i)]; }
  int& operator[](int i) { return e_[static_cast<size_t>(i)]; }
  int degree() const;
  bool is_zero() const;

  /// Componentwise divisibility: this divides e.
  bool divides(const Exponent& e) const;
  bool supported_on_h(int d) const;  // no x-variable appears

  Exponent operator+(const Exponent& o) const;
  /// Componentwise difference; requires o.divides(*this).
  Exponent operator-(const Exponent& o) const;

  bool operator==(const Exponent&) const = default;
  std::strong_ordering operator<=>(const Exponent& o) const;

  std::string to_string(const VarSpace& space) const;

 private:
  std::vector<int> e_;
};

/// Sparse multivariate polynomial with real coefficients over a VarSpace.
/// Terms are kept in graded-lex order; coefficients below the drop tolerance
/// are pruned after every arithmetic operation.
class Poly {
 public:
  static constexpr double kDropTol = 1e-14;
  using TermMap = std::map<Exponent, double>;

  explicit Poly(VarSpace space) : space_(std::move(space)) {}

  static Poly zero(const VarSpace& s) { return Poly(s); }
  static Poly constant(const VarSpace& s, double c);
  static Poly variable(const VarSpace& s, int index, int power = 1);
  static Poly monomial(const VarSpace& s, const Exponent& e, double coeff = 1.0);

  const VarSpace& space() const { return space_; }
  const TermMap& terms() const { return terms_; }
  int term_count() const { return static_cast<int>(terms_.size()); }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // 0 for the zero polynomial
  double coeff(const Exponent& e) const;
  double constant_term() const;
  double max_abs_coeff() const;

  /// Merge a term in place, pruning if the merged coefficient is negligible.
  Poly& add_term(const Exponent& e, double c, double drop_tol = kDropTol);

  Poly operator-() const;
  Poly operator+(const Poly& q) const;
  Poly operator-(const Poly& q) const;
  Poly operator*(const Poly& q) const;
  Poly operator*(double s) const;
  Poly& operator+=(const Poly& q);
  Poly& operator-=(const Poly& q);

  bool same_terms(const Poly& q) const { return terms_ == q.terms_; }

  double eval(std::span<const double> point) const;

  std::string to_string() const;

 private:
  void require_same_space(const Poly& q) const;

  VarSpace space_;
  TermMap terms_;
};

inline Poly operator*(double s, const Poly& p) { return p * s; }

/// Oriented rewrite rule lhs -> rhs. The lhs is a nonconstant monomial over
/// the h-block only; every monomial of rhs is strictly graded-lex smaller
/// than lhs, which guarantees termination of rewriting.
class RewriteRule {
 public:
  RewriteRule(Exponent lhs, Poly rhs);

  const Exponent& lhs() const { return lhs_; }
  const Poly& rhs() const { return rhs_; }

 private:
  Exponent lhs_;
  Poly rhs_;
};

/// Ordered list of rewrite rules over one VarSpace; rules apply in
/// declaration order.
class RelationSet {
 public:
  explicit RelationSet(VarSpace space) : space_(std::move(space)) {}
  RelationSet(VarSpace space, std::vector<RewriteRule> rules);

  const VarSpace& space() const { return space_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

  /// First rule (declaration order) whose lhs divides e, or nullptr.
  const RewriteRule* matching_rule(const Exponent& e) const;
  /// True if no rule lhs divides e.
  bool is_normal_monomial(const Exponent& e) const;

 private:
  VarSpace space_;
  std::vector<RewriteRule> rules_;
};

/// Reduce p modulo the relation set until no monomial is divisible by any
/// rule lhs. Each rewrite strictly decreases the graded-lex order of the
/// touched monomial, so this terminates.
Poly normal_form(const Poly& p, const RelationSet& rels);

/// All normal-form exponents of total degree <= t, graded-lex ascending.
std::vector<Exponent> monomial_basis(const VarSpace& space,
                                     const RelationSet& rels, int t);

/// Error from the polynomial text parser; position is a 0-based offset into
/// the parsed string.
struct PolyParseError : std::runtime_error {
  PolyParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg), position(pos) {}
  size_t position = 0;
};

/// Parse the term grammar `coeff*x1^a*h2^b +/- ...`. Whitespace is free,
/// exponent 1 and coefficient 1 may be omitted. Identifiers are resolved
/// against the space's names.
Poly parse_poly(std::string_view text, const VarSpace& space);

}  // namespace msos
