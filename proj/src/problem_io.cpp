#include "momentsos/problem_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace msos {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double_or(const std::string& s, int line, const char* what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ProblemParseError(std::string("invalid ") + what + " '" + s + "'",
                            line);
  }
}

int parse_int_or(const std::string& s, int line, const char* what) {
  try {
    size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ProblemParseError(std::string("invalid ") + what + " '" + s + "'",
                            line);
  }
}

struct RawLine {
  int number = 0;
  std::string key;
  std::string value;
};

}  // namespace

std::string EvaluatorSpec::to_string() const {
  switch (kind) {
    case Kind::Indicator: return "indicator(" + arg.to_string() + " >= 0)";
    case Kind::Abs: return "abs(" + arg.to_string() + ")";
    case Kind::Sign: return "sign(" + arg.to_string() + ")";
    case Kind::Floor: return "floor(" + arg.to_string() + ")";
  }
  return "?";
}

QuadraticModule ProblemFile::module() const {
  return make_archimedean(space, relations, generators, epsilon);
}

MeasurableEvaluator ProblemFile::build_evaluators() const {
  MeasurableEvaluator ev;
  const int d = space.d;
  for (int j = 0; j < space.m; ++j) {
    const auto& spec = evaluators[static_cast<size_t>(j)];
    if (!spec)
      throw std::invalid_argument("no evaluator declared for " +
                                  space.name(d + j));
    const Poly arg = spec->arg;
    const int total = space.size();
    auto eval_arg = [arg, d, total](const std::vector<double>& x) {
      std::vector<double> padded(static_cast<size_t>(total), 0.0);
      std::copy(x.begin(), x.begin() + d, padded.begin());
      return arg.eval(padded);
    };
    switch (spec->kind) {
      case EvaluatorSpec::Kind::Indicator:
        ev.h.push_back([eval_arg](const std::vector<double>& x) {
          return eval_arg(x) >= 0.0 ? 1.0 : 0.0;
        });
        break;
      case EvaluatorSpec::Kind::Abs:
        ev.h.push_back([eval_arg](const std::vector<double>& x) {
          return std::abs(eval_arg(x));
        });
        break;
      case EvaluatorSpec::Kind::Sign:
        ev.h.push_back([eval_arg](const std::vector<double>& x) {
          const double v = eval_arg(x);
          return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        });
        break;
      case EvaluatorSpec::Kind::Floor:
        ev.h.push_back([eval_arg](const std::vector<double>& x) {
          return std::floor(eval_arg(x));
        });
        break;
    }
  }
  return ev;
}

HierarchyOptions ProblemFile::hierarchy_options() const {
  HierarchyOptions opts;
  opts.sdp.gap_tol = tol_gap;
  opts.sdp.feas_tol = tol_feas;
  opts.flat_tol = tol_flat;
  return opts;
}

namespace {

EvaluatorSpec parse_evaluator_spec(const std::string& text,
                                   const VarSpace& space, int line) {
  const size_t open = text.find('(');
  const size_t close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ProblemParseError("evaluator must look like builtin(...)", line);
  const std::string head = trim(text.substr(0, open));
  std::string inner = trim(text.substr(open + 1, close - open - 1));

  EvaluatorSpec::Kind kind;
  Poly arg = Poly::zero(space);
  try {
    if (head == "indicator") {
      kind = EvaluatorSpec::Kind::Indicator;
      const size_t ge = inner.find(">=");
      if (ge == std::string::npos)
        throw ProblemParseError("indicator needs the form indicator(p >= q)",
                                line);
      arg = parse_poly(trim(inner.substr(0, ge)), space) -
            parse_poly(trim(inner.substr(ge + 2)), space);
    } else {
      if (head == "abs")
        kind = EvaluatorSpec::Kind::Abs;
      else if (head == "sign")
        kind = EvaluatorSpec::Kind::Sign;
      else if (head == "floor")
        kind = EvaluatorSpec::Kind::Floor;
      else
        throw ProblemParseError(
            "unknown evaluator '" + head +
                "' (builtins: indicator, abs, sign, floor)",
            line);
      arg = parse_poly(inner, space);
    }
  } catch (const PolyParseError& e) {
    throw ProblemParseError(e.what(), line);
  }
  EvaluatorSpec spec{kind, std::move(arg)};
  for (const auto& [e, c] : spec.arg.terms())
    for (int v = space.d; v < space.size(); ++v)
      if (e[v] != 0)
        throw ProblemParseError(
            "evaluator argument may use only x-variables", line);
  return spec;
}

}  // namespace

ProblemFile parse_problem(std::string_view text) {
  std::vector<RawLine> lines;
  {
    int number = 0;
    size_t start = 0;
    while (start <= text.size()) {
      size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++number;
      std::string raw = trim(text.substr(start, end - start));
      start = end + 1;
      if (raw.empty() || raw[0] == '#') continue;
      const size_t colon = raw.find(':');
      if (colon == std::string::npos)
        throw ProblemParseError("expected 'key: value'", number);
      lines.push_back(
          {number, trim(raw.substr(0, colon)), trim(raw.substr(colon + 1))});
    }
  }

  // Pass 1: the variable declaration, which everything else depends on.
  int d = -1, m = -1;
  int vars_line = -1;
  std::vector<std::string> names;
  for (const auto& l : lines) {
    if (l.key == "vars") {
      if (vars_line >= 0)
        throw ProblemParseError("duplicate 'vars' line", l.number);
      vars_line = l.number;
      for (const auto& tok : split_ws(l.value)) {
        const size_t eq = tok.find('=');
        if (eq == std::string::npos)
          throw ProblemParseError("vars expects d=<n> m=<n>", l.number);
        const std::string key = tok.substr(0, eq);
        const int v = parse_int_or(tok.substr(eq + 1), l.number, "count");
        if (key == "d")
          d = v;
        else if (key == "m")
          m = v;
        else
          throw ProblemParseError("vars expects d=<n> m=<n>", l.number);
      }
    } else if (l.key == "names") {
      names = split_ws(l.value);
    }
  }
  if (vars_line < 0) throw ProblemParseError("missing 'vars' line", 1);
  if (d < 0) d = 0;
  if (m < 0) m = 0;

  std::optional<VarSpace> space;
  try {
    space = names.empty() ? VarSpace(d, m) : VarSpace(d, m, names);
  } catch (const std::invalid_argument& e) {
    throw ProblemParseError(e.what(), vars_line);
  }

  auto parse_poly_line = [&](const std::string& text_in, int line) {
    try {
      return parse_poly(text_in, *space);
    } catch (const PolyParseError& e) {
      throw ProblemParseError(e.what(), line);
    }
  };

  ProblemFile pf{*space, RelationSet(*space), Poly::zero(*space), {}, 1.0,
                 {},     1,                   4,
                 1e-8,   1e-8,                1e-6,
                 201,    20240901};
  pf.evaluators.assign(static_cast<size_t>(m), std::nullopt);

  std::vector<RewriteRule> rules;
  bool have_objective = false;
  int rule_index = 0;
  for (const auto& l : lines) {
    if (l.key == "vars" || l.key == "names") continue;
    if (l.key == "relation") {
      ++rule_index;
      const size_t arrow = l.value.find("->");
      if (arrow == std::string::npos)
        throw ProblemParseError("relation expects 'lhs -> rhs'", l.number);
      const Poly lhs_poly = parse_poly_line(trim(l.value.substr(0, arrow)),
                                            l.number);
      const Poly rhs = parse_poly_line(trim(l.value.substr(arrow + 2)),
                                       l.number);
      if (lhs_poly.term_count() != 1 ||
          std::abs(lhs_poly.terms().begin()->second - 1.0) > 1e-12)
        throw ProblemParseError(
            "rule " + std::to_string(rule_index) +
                ": lhs must be a single monic monomial",
            l.number);
      try {
        rules.emplace_back(lhs_poly.terms().begin()->first, rhs);
      } catch (const std::invalid_argument& e) {
        throw ProblemParseError(
            "rule " + std::to_string(rule_index) + ": " + e.what(), l.number);
      }
    } else if (l.key == "objective") {
      pf.objective = parse_poly_line(l.value, l.number);
      have_objective = true;
    } else if (l.key == "generator") {
      pf.generators.push_back(parse_poly_line(l.value, l.number));
    } else if (l.key == "epsilon") {
      pf.epsilon = parse_double_or(l.value, l.number, "epsilon");
      if (!(pf.epsilon > 0.0))
        throw ProblemParseError("epsilon must be > 0", l.number);
    } else if (l.key == "evaluator") {
      const size_t eq = l.value.find('=');
      if (eq == std::string::npos)
        throw ProblemParseError("evaluator expects 'hj = builtin(...)'",
                                l.number);
      const std::string hname = trim(l.value.substr(0, eq));
      auto idx = space->index_of(hname);
      if (!idx || *idx < d)
        throw ProblemParseError("'" + hname + "' is not an h-variable",
                                l.number);
      pf.evaluators[static_cast<size_t>(*idx - d)] =
          parse_evaluator_spec(trim(l.value.substr(eq + 1)), *space, l.number);
    } else if (l.key == "orders") {
      const size_t dots = l.value.find("..");
      if (dots == std::string::npos)
        throw ProblemParseError("orders expects 'tmin..tmax'", l.number);
      pf.t_min = parse_int_or(trim(l.value.substr(0, dots)), l.number, "order");
      pf.t_max =
          parse_int_or(trim(l.value.substr(dots + 2)), l.number, "order");
      if (pf.t_min < 1 || pf.t_min > pf.t_max)
        throw ProblemParseError("orders must satisfy 1 <= tmin <= tmax",
                                l.number);
    } else if (l.key == "tol_gap") {
      pf.tol_gap = parse_double_or(l.value, l.number, "tolerance");
    } else if (l.key == "tol_feas") {
      pf.tol_feas = parse_double_or(l.value, l.number, "tolerance");
    } else if (l.key == "tol_flat") {
      pf.tol_flat = parse_double_or(l.value, l.number, "tolerance");
    } else if (l.key == "grid") {
      pf.grid_points = parse_int_or(l.value, l.number, "grid");
      if (pf.grid_points < 2)
        throw ProblemParseError("grid needs at least 2 points", l.number);
    } else if (l.key == "seed") {
      pf.seed = static_cast<std::uint32_t>(
          parse_int_or(l.value, l.number, "seed"));
    } else {
      throw ProblemParseError("unknown key '" + l.key + "'", l.number);
    }
  }

  if (!have_objective) throw ProblemParseError("missing 'objective' line", 1);
  try {
    pf.relations = RelationSet(*space, std::move(rules));
  } catch (const std::invalid_argument& e) {
    throw ProblemParseError(e.what(), vars_line);
  }
  pf.objective = normal_form(pf.objective, pf.relations);
  for (auto& g : pf.generators) g = normal_form(g, pf.relations);
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string fmt_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

void json_escape(std::ostream& os, std::string_view s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      default: os << c;
    }
  }
  os << '"';
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt_sig12(v);
}

}  // namespace

void write_text_report(std::ostream& os, const SolveReport& report) {
  os << "order  bound             status            flat  rank    iters\n";
  for (const auto& r : report.hierarchy.results) {
    char bound[32];
    if (r.lower_bound)
      std::snprintf(bound, sizeof(bound), "%-16.12g", *r.lower_bound);
    else
      std::snprintf(bound, sizeof(bound), "%-16s", "undefined");
    char line[160];
    std::snprintf(line, sizeof(line), "%-6d %s %-17s %-5s %2d/%-2d  %d\n",
                  r.t, bound, sdp::to_string(r.sdp_status).c_str(),
                  r.flat ? "yes" : "no", r.rank_t, r.rank_prev, r.iterations);
    os << line;
  }
  os << "stop_reason: " << to_string(report.hierarchy.stop_reason) << "\n";
  if (report.hierarchy.best_bound)
    os << "best_bound: " << fmt_sig12(*report.hierarchy.best_bound) << "\n";
  else
    os << "best_bound: undefined\n";

  if (report.certificate) {
    os << "\ncertificate:\n";
    write_certificate(os, *report.certificate);
  }
  if (report.atoms) {
    const auto& a = *report.atoms;
    os << "\natoms (" << a.atoms.size()
       << ", reliable=" << (a.reliable ? "yes" : "no")
       << ", max_generator_violation="
       << fmt_sig12(a.max_generator_violation) << "):\n";
    for (const auto& atom : a.atoms) {
      os << "  weight " << fmt_sig12(atom.weight) << " at (";
      for (size_t i = 0; i < atom.point.size(); ++i)
        os << (i ? ", " : "") << fmt_sig12(atom.point[i]);
      os << ")\n";
    }
  }
  os << "\nelapsed_ms: " << fmt_sig12(report.wall_ms) << "\n";
}

void write_json_report(std::ostream& os, const SolveReport& report) {
  os << "{\n  \"orders\": [";
  for (size_t i = 0; i < report.hierarchy.results.size(); ++i) {
    const auto& r = report.hierarchy.results[i];
    os << (i ? ",\n    " : "\n    ");
    os << "{\"t\": " << r.t << ", \"bound\": "
       << (r.lower_bound ? json_number(*r.lower_bound) : "null")
       << ", \"status\": ";
    json_escape(os, sdp::to_string(r.sdp_status));
    os << ", \"flat\": " << (r.flat ? "true" : "false")
       << ", \"rank_t\": " << r.rank_t << ", \"rank_prev\": " << r.rank_prev
       << ", \"iterations\": " << r.iterations << "}";
  }
  os << "\n  ],\n";
  os << "  \"best_bound\": "
     << (report.hierarchy.best_bound ? json_number(*report.hierarchy.best_bound)
                                     : "null")
     << ",\n";
  os << "  \"stop_reason\": ";
  json_escape(os, to_string(report.hierarchy.stop_reason));
  os << ",\n  \"certificate\": ";
  if (report.certificate) {
    const auto& c = *report.certificate;
    os << "{\"lambda\": " << json_number(c.lambda) << ", \"sigma\": [";
    for (size_t i = 0; i < c.sos.size(); ++i) {
      os << (i ? ", " : "") << "[";
      for (size_t j = 0; j < c.sos[i].size(); ++j) {
        os << (j ? ", " : "");
        json_escape(os, c.sos[i][j].to_string());
      }
      os << "]";
    }
    os << "], \"residual_norm\": " << json_number(c.residual_norm) << "}";
  } else {
    os << "null";
  }
  os << ",\n  \"atoms\": ";
  if (report.atoms) {
    const auto& a = *report.atoms;
    os << "{\"reliable\": " << (a.reliable ? "true" : "false")
       << ", \"max_generator_violation\": "
       << json_number(a.max_generator_violation) << ", \"points\": [";
    for (size_t i = 0; i < a.atoms.size(); ++i) {
      os << (i ? ", " : "") << "[";
      for (size_t k = 0; k < a.atoms[i].point.size(); ++k)
        os << (k ? ", " : "") << json_number(a.atoms[i].point[k]);
      os << "]";
    }
    os << "], \"weights\": [";
    for (size_t i = 0; i < a.atoms.size(); ++i)
      os << (i ? ", " : "") << json_number(a.atoms[i].weight);
    os << "]}";
  } else {
    os << "null";
  }
  os << "\n}\n";
}

void write_certificate(std::ostream& os, const Certificate& cert) {
  os << "lambda " << fmt_double(cert.lambda) << "\n";
  for (size_t i = 0; i < cert.sos.size(); ++i)
    for (size_t j = 0; j < cert.sos[i].size(); ++j)
      os << "sigma[" << i << "] square " << j << ": "
         << cert.sos[i][j].to_string() << "\n";
  os << "residual_norm " << fmt_double(cert.residual_norm) << "\n";
}

Certificate read_certificate(std::istream& is, const VarSpace& space) {
  Certificate cert;
  std::string line;
  int number = 0;
  bool have_lambda = false;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("lambda", 0) == 0) {
      cert.lambda = parse_double_or(trim(t.substr(6)), number, "lambda");
      have_lambda = true;
    } else if (t.rfind("residual_norm", 0) == 0) {
      cert.residual_norm =
          parse_double_or(trim(t.substr(13)), number, "residual_norm");
    } else if (t.rfind("sigma[", 0) == 0) {
      const size_t close = t.find(']');
      const size_t colon = t.find(':');
      if (close == std::string::npos || colon == std::string::npos)
        throw ProblemParseError("malformed sigma line", number);
      const int idx = parse_int_or(t.substr(6, close - 6), number, "index");
      if (idx < 0 || idx > 64)
        throw ProblemParseError("sigma index out of range", number);
      if (cert.sos.size() <= static_cast<size_t>(idx))
        cert.sos.resize(static_cast<size_t>(idx) + 1);
      try {
        cert.sos[static_cast<size_t>(idx)].push_back(
            parse_poly(t.substr(colon + 1), space));
      } catch (const PolyParseError& e) {
        throw ProblemParseError(e.what(), number);
      }
    } else {
      throw ProblemParseError("unrecognized certificate line", number);
    }
  }
  if (!have_lambda)
    throw ProblemParseError("certificate is missing the lambda line", 1);
  return cert;
}

}  // namespace msos
