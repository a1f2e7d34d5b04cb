#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "momentsos/certify.hpp"
#include "momentsos/hierarchy.hpp"
#include "momentsos/quadmod.hpp"

namespace msos {

/// Builtin measurable-generator realizations available in problem files.
struct EvaluatorSpec {
  enum class Kind { Indicator, Abs, Sign, Floor };
  Kind kind = Kind::Indicator;
  Poly arg;  // over the x-variables only (h entries must not appear)

  std::string to_string() const;
};

/// Parsed problem file: the user-facing encoding of (A, Q, f) plus run
/// settings. See README for the exact grammar.
struct ProblemFile {
  VarSpace space;
  RelationSet relations;
  Poly objective;
  std::vector<Poly> generators;
  double epsilon = 1.0;
  std::vector<std::optional<EvaluatorSpec>> evaluators;  // per h-variable
  int t_min = 1;
  int t_max = 4;
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  double tol_flat = 1e-6;
  int grid_points = 201;
  std::uint32_t seed = 20240901;

  QuadraticModule module() const;
  /// Builds callables for the declared evaluators; throws if any h-variable
  /// lacks one.
  MeasurableEvaluator build_evaluators() const;
  HierarchyOptions hierarchy_options() const;
};

struct ProblemParseError : std::runtime_error {
  ProblemParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line(line) {}
  int line = 0;
};

ProblemFile parse_problem(std::string_view text);
ProblemFile load_problem(const std::string& path);

/// Everything cmd_solve reports.
struct SolveReport {
  HierarchyReport hierarchy;
  std::optional<Certificate> certificate;
  std::optional<AtomSet> atoms;
  double wall_ms = 0.0;  // text report only; excluded from the JSON document
};

/// Fixed-precision formatting used by the machine-readable report:
/// 12 significant digits.
std::string fmt_sig12(double v);

void write_text_report(std::ostream& os, const SolveReport& report);
/// Deterministic JSON document (schema in README); identical runs produce
/// byte-identical output.
void write_json_report(std::ostream& os, const SolveReport& report);

void write_certificate(std::ostream& os, const Certificate& cert);
Certificate read_certificate(std::istream& is, const VarSpace& space);

}  // namespace msos
