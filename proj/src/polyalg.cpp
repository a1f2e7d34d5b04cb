#include "momentsos/polyalg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace msos {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  while (exp > 0) {
    if (exp & 1) r *= base;
    base *= base;
    exp >>= 1;
  }
  return r;
}

std::vector<std::string> default_names(int d, int m) {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(d + m));
  for (int i = 1; i <= d; ++i) names.push_back("x" + std::to_string(i));
  for (int j = 1; j <= m; ++j) names.push_back("h" + std::to_string(j));
  return names;
}

}  // namespace

VarSpace::VarSpace(int d_, int m_) : VarSpace(d_, m_, default_names(d_, m_)) {}

VarSpace::VarSpace(int d_, int m_, std::vector<std::string> names_)
    : d(d_), m(m_), names(std::move(names_)) {
  if (d < 0 || m < 0 || d + m < 1)
    throw std::invalid_argument("VarSpace: need d >= 1 or m >= 1");
  if (names.size() != static_cast<size_t>(d + m))
    throw std::invalid_argument("VarSpace: expected " + std::to_string(d + m) +
                                " names, got " + std::to_string(names.size()));
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty())
      throw std::invalid_argument("VarSpace: empty variable name");
    for (size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j])
        throw std::invalid_argument("VarSpace: duplicate variable name '" +
                                    names[i] + "'");
  }
}

std::optional<int> VarSpace::index_of(std::string_view ident) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == ident) return static_cast<int>(i);
  return std::nullopt;
}

Exponent Exponent::unit(int nvars, int var, int power) {
  Exponent e(nvars);
  e[var] = power;
  return e;
}

int Exponent::degree() const {
  int t = 0;
  for (int v : e_) t += v;
  return t;
}

bool Exponent::is_zero() const {
  return std::all_of(e_.begin(), e_.end(), [](int v) { return v == 0; });
}

bool Exponent::divides(const Exponent& e) const {
  if (e_.size() != e.e_.size()) return false;
  for (size_t i = 0; i < e_.size(); ++i)
    if (e_[i] > e.e_[i]) return false;
  return true;
}

bool Exponent::supported_on_h(int d) const {
  for (int i = 0; i < d && i < size(); ++i)
    if (e_[static_cast<size_t>(i)] != 0) return false;
  return true;
}

Exponent Exponent::operator+(const Exponent& o) const {
  Exponent r = *this;
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
  return r;
}

Exponent Exponent::operator-(const Exponent& o) const {
  Exponent r = *this;
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] -= o.e_[i];
  return r;
}

std::strong_ordering Exponent::operator<=>(const Exponent& o) const {
  if (auto c = degree() <=> o.degree(); c != 0) return c;
  return std::lexicographical_compare_three_way(e_.begin(), e_.end(),
                                                o.e_.begin(), o.e_.end());
}

std::string Exponent::to_string(const VarSpace& space) const {
  std::string s;
  for (int i = 0; i < size(); ++i) {
    if (e_[static_cast<size_t>(i)] == 0) continue;
    if (!s.empty()) s += "*";
    s += space.name(i);
    if (e_[static_cast<size_t>(i)] != 1)
      s += "^" + std::to_string(e_[static_cast<size_t>(i)]);
  }
  return s;
}

Poly Poly::constant(const VarSpace& s, double c) {
  Poly p(s);
  p.add_term(Exponent(s.size()), c);
  return p;
}

Poly Poly::variable(const VarSpace& s, int index, int power) {
  if (index < 0 || index >= s.size())
    throw std::invalid_argument("Poly::variable: index out of range");
  Poly p(s);
  p.add_term(Exponent::unit(s.size(), index, power), 1.0);
  return p;
}

Poly Poly::monomial(const VarSpace& s, const Exponent& e, double coeff) {
  if (e.size() != s.size())
    throw std::invalid_argument("Poly::monomial: exponent length mismatch");
  Poly p(s);
  p.add_term(e, coeff);
  return p;
}

int Poly::degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Poly::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Poly::constant_term() const { return coeff(Exponent(space_.size())); }

double Poly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Poly& Poly::add_term(const Exponent& e, double c, double drop_tol) {
  if (e.size() != space_.size())
    throw std::invalid_argument("Poly::add_term: exponent length mismatch");
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) <= drop_tol) terms_.erase(it);
  return *this;
}

void Poly::require_same_space(const Poly& q) const {
  if (!(space_ == q.space_))
    throw std::invalid_argument("polynomial operands over different spaces");
}

Poly Poly::operator-() const {
  Poly r(space_);
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

Poly Poly::operator+(const Poly& q) const {
  require_same_space(q);
  Poly r = *this;
  for (const auto& [e, c] : q.terms_) r.add_term(e, c);
  return r;
}

Poly Poly::operator-(const Poly& q) const {
  require_same_space(q);
  Poly r = *this;
  for (const auto& [e, c] : q.terms_) r.add_term(e, -c);
  return r;
}

Poly Poly::operator*(const Poly& q) const {
  require_same_space(q);
  Poly r(space_);
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : q.terms_) r.add_term(e1 + e2, c1 * c2);
  return r;
}

Poly Poly::operator*(double s) const {
  Poly r(space_);
  for (const auto& [e, c] : terms_) {
    double v = c * s;
    if (std::abs(v) > kDropTol) r.terms_.emplace(e, v);
  }
  return r;
}

Poly& Poly::operator+=(const Poly& q) {
  require_same_space(q);
  for (const auto& [e, c] : q.terms_) add_term(e, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& q) {
  require_same_space(q);
  for (const auto& [e, c] : q.terms_) add_term(e, -c);
  return *this;
}

double Poly::eval(std::span<const double> point) const {
  if (point.size() != static_cast<size_t>(space_.size()))
    throw std::invalid_argument("Poly::eval: point length mismatch");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (int i = 0; i < e.size(); ++i)
      if (e[i] != 0) term *= ipow(point[static_cast<size_t>(i)], e[i]);
    acc += term;
  }
  return acc;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  // Leading term first: iterate graded-lex descending.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    const bool first = s.empty();
    const double a = std::abs(c);
    if (first)
      s += (c < 0 ? "-" : "");
    else
      s += (c < 0 ? " - " : " + ");
    std::string mono = e.to_string(space_);
    if (mono.empty()) {
      s += fmt_double(a);
    } else if (a == 1.0) {
      s += mono;
    } else {
      s += fmt_double(a) + "*" + mono;
    }
  }
  return s;
}

RewriteRule::RewriteRule(Exponent lhs, Poly rhs)
    : lhs_(std::move(lhs)), rhs_(std::move(rhs)) {
  if (lhs_.size() != rhs_.space().size())
    throw std::invalid_argument("RewriteRule: lhs length mismatch");
  if (lhs_.is_zero())
    throw std::invalid_argument("RewriteRule: lhs must be nonconstant");
  if (!lhs_.supported_on_h(rhs_.space().d))
    throw std::invalid_argument(
        "RewriteRule: lhs must involve only h-variables");
  for (const auto& [e, c] : rhs_.terms())
    if (!(e < lhs_))
      throw std::invalid_argument(
          "RewriteRule: rhs monomial '" + e.to_string(rhs_.space()) +
          "' is not graded-lex smaller than the lhs (rule must reduce)");
}

RelationSet::RelationSet(VarSpace space, std::vector<RewriteRule> rules)
    : space_(std::move(space)), rules_(std::move(rules)) {
  for (size_t i = 0; i < rules_.size(); ++i) {
    if (!(rules_[i].rhs().space() == space_))
      throw std::invalid_argument("RelationSet: rule over different space");
    for (size_t j = i + 1; j < rules_.size(); ++j)
      if (rules_[i].lhs() == rules_[j].lhs())
        throw std::invalid_argument("RelationSet: duplicate rule lhs");
  }
}

const RewriteRule* RelationSet::matching_rule(const Exponent& e) const {
  for (const auto& r : rules_)
    if (r.lhs().divides(e)) return &r;
  return nullptr;
}

bool RelationSet::is_normal_monomial(const Exponent& e) const {
  return matching_rule(e) == nullptr;
}

Poly normal_form(const Poly& p, const RelationSet& rels) {
  if (!(p.space() == rels.space()))
    throw std::invalid_argument("normal_form: space mismatch");
  if (rels.empty()) return p;

  Poly::TermMap work = p.terms();
  for (;;) {
    // Pick the largest reducible monomial; every replacement is strictly
    // smaller, so the scan makes progress.
    auto hit = work.rend();
    const RewriteRule* rule = nullptr;
    for (auto it = work.rbegin(); it != work.rend(); ++it) {
      rule = rels.matching_rule(it->first);
      if (rule) {
        hit = it;
        break;
      }
    }
    if (!rule) break;

    const Exponent e = hit->first;
    const double c = hit->second;
    work.erase(std::next(hit).base());
    const Exponent rest = e - rule->lhs();
    for (const auto& [re, rc] : rule->rhs().terms()) {
      const Exponent merged = re + rest;
      auto [it, inserted] = work.try_emplace(merged, c * rc);
      if (!inserted) it->second += c * rc;
      if (std::abs(it->second) <= Poly::kDropTol) work.erase(it);
    }
  }

  Poly out(p.space());
  for (const auto& [e, c] : work) out.add_term(e, c);
  return out;
}

namespace {

void enumerate_exponents(const VarSpace& space, const RelationSet& rels,
                         int var, int remaining, Exponent& cur,
                         std::vector<Exponent>& out) {
  if (var == space.size()) {
    if (rels.is_normal_monomial(cur)) out.push_back(cur);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    cur[var] = k;
    enumerate_exponents(space, rels, var + 1, remaining - k, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<Exponent> monomial_basis(const VarSpace& space,
                                     const RelationSet& rels, int t) {
  if (t < 0) throw std::invalid_argument("monomial_basis: negative degree");
  if (!(space == rels.space()))
    throw std::invalid_argument("monomial_basis: space mismatch");
  std::vector<Exponent> out;
  Exponent cur(space.size());
  enumerate_exponents(space, rels, 0, t, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct PolyParser {
  std::string_view text;
  size_t pos = 0;
  const VarSpace& space;

  explicit PolyParser(std::string_view t, const VarSpace& s)
      : text(t), space(s) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw PolyParseError(msg + " at position " + std::to_string(pos), pos);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  double parse_number() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      size_t epos = pos + 1;
      if (epos < text.size() && (text[epos] == '+' || text[epos] == '-')) ++epos;
      if (epos < text.size() &&
          std::isdigit(static_cast<unsigned char>(text[epos]))) {
        pos = epos;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
          ++pos;
      }
    }
    if (pos == start) fail("expected number");
    double value = 0.0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, value);
    if (res.ec != std::errc{}) {
      pos = start;
      fail("malformed number");
    }
    return value;
  }

  std::string parse_ident() {
    skip_ws();
    size_t start = pos;
    auto is_ident = [](char c, bool first) {
      return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
             (!first && std::isdigit(static_cast<unsigned char>(c)));
    };
    while (pos < text.size() && is_ident(text[pos], pos == start)) ++pos;
    if (pos == start) fail("expected variable name");
    return std::string(text.substr(start, pos - start));
  }

  // factor := number | ident ['^' integer]
  void parse_factor(double& coeff, Exponent& expo) {
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      coeff *= parse_number();
      return;
    }
    size_t ident_pos = pos;
    std::string name = parse_ident();
    auto idx = space.index_of(name);
    if (!idx) {
      pos = ident_pos;
      fail("unknown variable '" + name + "'");
    }
    int power = 1;
    if (accept('^')) {
      skip_ws();
      size_t ppos = pos;
      double pw = parse_number();
      power = static_cast<int>(pw);
      if (pw != static_cast<double>(power) || power < 0) {
        pos = ppos;
        fail("exponent must be a nonnegative integer");
      }
    }
    expo[*idx] += power;
  }

  // term := factor ('*' factor)*
  void parse_term(Poly& acc, double sign) {
    double coeff = sign;
    Exponent expo(space.size());
    parse_factor(coeff, expo);
    while (accept('*')) parse_factor(coeff, expo);
    acc.add_term(expo, coeff);
  }

  Poly parse() {
    Poly acc(space);
    if (eof()) fail("empty polynomial");
    double sign = 1.0;
    if (accept('-'))
      sign = -1.0;
    else
      accept('+');
    parse_term(acc, sign);
    while (!eof()) {
      if (accept('+'))
        sign = 1.0;
      else if (accept('-'))
        sign = -1.0;
      else
        fail("expected '+' or '-'");
      parse_term(acc, sign);
    }
    return acc;
  }
};

}  // namespace

Poly parse_poly(std::string_view text, const VarSpace& space) {
  PolyParser parser(text, space);
  return parser.parse();
}

}  // namespace msos
