#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbp/model.hpp"

namespace tbp {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
  int length = 0;
};

struct ParseDiagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string message;
  SourceSpan span;
};

std::string to_string(const ParseDiagnostic& d);

// Surface form of one PDL fact/goal statement, kept for canonical printing.
struct PdlTokenStmt {
  std::string label;
  bool is_goal = false;
  std::string component;
  std::string value;
  std::vector<std::string> args;  // ?name or literal
  bool has_at = false;
  Bound start;
  Bound end;
  Bound duration;
  SourceSpan span;

  // Structural comparison for round-trip checks; spans are incidental.
  friend bool operator==(const PdlTokenStmt& a, const PdlTokenStmt& b) {
    return a.label == b.label && a.is_goal == b.is_goal && a.component == b.component &&
           a.value == b.value && a.args == b.args && a.has_at == b.has_at && a.start == b.start &&
           a.end == b.end && a.duration == b.duration;
  }
};

struct PdlRelation {
  std::string left;
  RelKind kind = RelKind::before;
  std::vector<Bound> bounds;
  std::optional<TimeValue> anchor;
  std::string right;  // empty for point relations
  SourceSpan span;

  friend bool operator==(const PdlRelation& a, const PdlRelation& b) {
    return a.left == b.left && a.kind == b.kind && a.bounds == b.bounds && a.anchor == b.anchor &&
           a.right == b.right;
  }
};

struct PdlBinding {
  std::string var;
  std::string value;
  SourceSpan span;

  friend bool operator==(const PdlBinding& a, const PdlBinding& b) {
    return a.var == b.var && a.value == b.value;
  }
};

struct LiftedProblem {
  std::string name;
  std::string domain_name;
  std::vector<PdlTokenStmt> statements;
  std::vector<PdlRelation> relations;
  std::vector<PdlBinding> bindings;

  friend bool operator==(const LiftedProblem&, const LiftedProblem&) = default;
};

struct DdlParseResult {
  std::optional<PlanningDomain> domain;
  std::optional<LiftedDomain> lifted;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return domain.has_value(); }
};

struct PdlParseResult {
  std::optional<PlanningProblem> problem;
  std::optional<LiftedProblem> lifted;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return problem.has_value(); }
};

// Parses and grounds a DDL domain. Any error leaves `domain` empty; the
// greedy statement-level recovery keeps going so one pass reports every
// independent mistake.
DdlParseResult parse_ddl(const std::string& text, const std::string& file = "<ddl>");

// Parses a PDL problem against an already grounded domain. Trailing
// `?name = literal;` bindings are applied to fact and goal arguments, AT
// triples are read as [start][end][duration], and goal windows become
// point-anchored atoms of the goal.
PdlParseResult parse_pdl(const std::string& text, std::shared_ptr<const PlanningDomain> domain,
                         const std::string& file = "<pdl>");

std::string pretty_print(const LiftedDomain& d);
std::string pretty_print(const LiftedProblem& p);

}  // namespace tbp
