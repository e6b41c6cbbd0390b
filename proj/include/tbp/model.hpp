#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tbp/relations.hpp"
#include "tbp/time.hpp"

namespace tbp {

struct Diagnostic {
  std::string where;
  std::string message;
};

std::string to_string(const Diagnostic& d);

enum class Controllability : unsigned char { controllable, uncontrollable };

// A parameter domain: a symbol enumeration or an integer range.
struct ParameterDomain {
  std::string name;
  bool numeric = false;
  std::vector<std::string> symbols;
  ticks_t lo = 0;
  ticks_t hi = 0;

  std::vector<std::string> members() const;

  friend bool operator==(const ParameterDomain&, const ParameterDomain&) = default;
};

// ---------------------------------------------------------------------------
// Ground model
// ---------------------------------------------------------------------------

struct Value {
  std::string name;  // fully instantiated, e.g. "At(location1)"
  TimeValue dmin = TimeValue::of(1);
  TimeValue dmax = TimeValue::inf();
  Controllability tag = Controllability::controllable;

  friend bool operator==(const Value&, const Value&) = default;
};

struct StateVariable {
  std::string name;
  bool external = false;
  std::vector<Value> values;
  // Successor value indices, one list per value, sorted ascending.
  std::vector<std::vector<std::size_t>> transitions;

  std::optional<std::size_t> value_index(const std::string& v) const;

  friend bool operator==(const StateVariable&, const StateVariable&) = default;
};

// Atom operands index the disjunct's token variables; 0 is the trigger token,
// i >= 1 is vars[i-1]. Point relations ignore `right`.
struct RuleAtom {
  std::size_t left = 0;
  std::size_t right = 0;
  Relation relation;

  friend bool operator==(const RuleAtom&, const RuleAtom&) = default;
};

struct Existential {
  struct BoundVar {
    std::string variable;
    std::string value;

    friend bool operator==(const BoundVar&, const BoundVar&) = default;
  };
  std::vector<BoundVar> vars;
  std::vector<RuleAtom> atoms;

  friend bool operator==(const Existential&, const Existential&) = default;
};

struct SynchronizationRule {
  std::string trigger_variable;  // empty for an empty-trigger (goal) rule
  std::string trigger_value;
  std::vector<Existential> disjuncts;

  friend bool operator==(const SynchronizationRule&, const SynchronizationRule&) = default;
};

struct PlanningDomain {
  std::string name;
  TimeValue horizon = TimeValue::of(0);
  std::vector<StateVariable> variables;
  std::vector<SynchronizationRule> rules;

  const StateVariable* find_variable(const std::string& n) const;
  std::vector<const SynchronizationRule*> rules_for(const std::string& variable,
                                                    const std::string& value) const;

  friend bool operator==(const PlanningDomain&, const PlanningDomain&) = default;
};

std::vector<Diagnostic> validate_domain(const PlanningDomain& d);

// ---------------------------------------------------------------------------
// Goals and problems
// ---------------------------------------------------------------------------

struct Accomplishment {
  std::string name;
  std::string variable;
  std::string value;

  friend bool operator==(const Accomplishment&, const Accomplishment&) = default;
};

// Relates two accomplishments by name; point relations use `left` only.
struct GoalAtom {
  std::string left;
  std::string right;
  Relation relation;

  friend bool operator==(const GoalAtom&, const GoalAtom&) = default;
};

struct Goal {
  std::vector<Accomplishment> accomplishments;
  // Disjunction of conjunctions; empty means trivially true.
  std::vector<std::vector<GoalAtom>> relational;

  friend bool operator==(const Goal&, const Goal&) = default;
};

// Rewrites a goal into an empty-trigger rule: one disjunct per relational
// disjunct (or a single atom-free one), each binding every accomplishment.
// Throws std::invalid_argument on an atom naming an unknown accomplishment.
SynchronizationRule goal_to_rule(const Goal& g);

struct TokenSpec {
  std::string variable;
  std::string value;
  Bound start;
  Bound end;
  Bound duration;

  friend bool operator==(const TokenSpec&, const TokenSpec&) = default;
};

struct ObservationTimeline {
  std::string variable;
  std::vector<TokenSpec> tokens;

  friend bool operator==(const ObservationTimeline&, const ObservationTimeline&) = default;
};

struct ObsTokenRef {
  std::string variable;
  std::size_t index = 0;

  friend bool operator==(const ObsTokenRef&, const ObsTokenRef&) = default;
};

struct ObsRelation {
  ObsTokenRef left;
  ObsTokenRef right;
  Relation relation;

  friend bool operator==(const ObsRelation&, const ObsRelation&) = default;
};

struct PlanningProblem {
  std::string name;
  std::shared_ptr<const PlanningDomain> domain;
  TimeValue horizon = TimeValue::of(0);
  std::vector<TokenSpec> facts;
  std::vector<ObservationTimeline> observations;
  std::vector<ObsRelation> obs_relations;
  Goal goal;
};

// Structural checks plus the observation consistency check (each external
// variable covered to the horizon by one internally consistent timeline).
std::vector<Diagnostic> validate_problem(const PlanningProblem& p);

// ---------------------------------------------------------------------------
// Lifted model (parser output, pre-grounding)
// ---------------------------------------------------------------------------

struct LiftedValue {
  std::string name;
  std::vector<std::string> params;       // ?names, declaration order
  std::vector<std::string> param_types;  // parameter-domain names, positional
  TimeValue dmin = TimeValue::of(1);
  TimeValue dmax = TimeValue::inf();
  Controllability tag = Controllability::controllable;

  struct Successor {
    std::string value;
    std::vector<std::string> args;  // ?name or literal

    friend bool operator==(const Successor&, const Successor&) = default;
  };
  std::vector<Successor> successors;
  // Scoped over the whole block: source parameters plus every successor's.
  struct Constraint {
    std::string lhs;
    std::string rhs;
    bool equal = true;

    friend bool operator==(const Constraint&, const Constraint&) = default;
  };
  std::vector<Constraint> constraints;

  friend bool operator==(const LiftedValue&, const LiftedValue&) = default;
};

struct LiftedType {
  std::string name;
  bool external = false;
  std::vector<LiftedValue> values;

  friend bool operator==(const LiftedType&, const LiftedType&) = default;
};

struct LiftedComponent {
  std::string name;
  std::string type;

  friend bool operator==(const LiftedComponent&, const LiftedComponent&) = default;
};

struct LiftedCondition {
  std::string label;
  std::string component;
  std::string value;
  std::vector<std::string> args;  // ?name or literal

  friend bool operator==(const LiftedCondition&, const LiftedCondition&) = default;
};

struct LiftedRelationStmt {
  std::string left;   // condition label, empty = trigger
  std::string right;  // condition label; empty for point relations
  RelKind kind = RelKind::meets;
  std::vector<Bound> bounds;
  std::optional<TimeValue> anchor;

  friend bool operator==(const LiftedRelationStmt&, const LiftedRelationStmt&) = default;
};

struct LiftedConstraintStmt {
  std::string lhs;
  std::string rhs;
  bool equal = true;

  friend bool operator==(const LiftedConstraintStmt&, const LiftedConstraintStmt&) = default;
};

struct LiftedRule {
  std::string component;
  std::string trigger_value;
  std::vector<std::string> trigger_params;  // ?names
  std::vector<LiftedCondition> conditions;
  std::vector<LiftedRelationStmt> relations;
  std::vector<LiftedConstraintStmt> constraints;

  friend bool operator==(const LiftedRule&, const LiftedRule&) = default;
};

struct LiftedDomain {
  std::string name;
  std::string module_name;
  TimeValue horizon = TimeValue::of(0);
  std::vector<ParameterDomain> parameters;
  std::vector<LiftedType> types;
  std::vector<LiftedComponent> components;
  std::vector<LiftedRule> rules;

  friend bool operator==(const LiftedDomain&, const LiftedDomain&) = default;
};

struct GroundResult {
  std::optional<PlanningDomain> domain;
  std::vector<Diagnostic> diagnostics;
};

// Instantiates parameterized values, transitions and rules over their
// parameter domains, filtered by the declared constraints.
GroundResult ground(const LiftedDomain& lifted);

std::string render_value_name(const std::string& base, const std::vector<std::string>& args);

}  // namespace tbp
