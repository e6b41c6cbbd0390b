#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbp/model.hpp"
#include "tbp/plan.hpp"

namespace tbp {

// A satisfying token assignment for one rule trigger: which disjunct fired
// and which token each annotated variable received. Slot 0 of `assignment`
// mirrors the trigger token and is meaningless for trigger-less rules; slots
// 1..n follow the disjunct's variable list.
struct Witness {
  std::string rule;
  std::optional<TokenName> trigger;
  std::size_t disjunct = 0;
  std::vector<TokenName> assignment;
};

struct Finding {
  enum class Kind { structure, coverage, rule, window, horizon, observation };
  Kind kind = Kind::structure;
  std::string message;
};

std::string to_string(const Finding& f);

// Outcome of one checking pass. pass is true exactly when findings is
// empty; witnesses collect one entry per satisfied rule trigger.
struct ValidityReport {
  bool pass = true;
  std::vector<Finding> findings;
  std::vector<Witness> witnesses;

  void add(Finding::Kind kind, std::string message);
  void merge(ValidityReport other);
};

// Whether the scheduled timeline assigns admissible instants to the flexible
// one: same values in order, each end inside its window, each duration inside
// both the token window and the value bounds. Throws std::invalid_argument
// when the two disagree on variable or length, or name unknown values.
bool check_is_schedule(const ScheduledTimeline& stl, const PlanTimeline& ftl,
                       const PlanningDomain& domain);
// The set form pairs timelines by variable and requires the same coverage on
// both sides.
bool check_is_schedule(const Schedule& stl, const FlexiblePlan& plan,
                       const PlanningDomain& domain);

// Evaluates the given rules against concrete token intervals: every trigger
// occurrence needs some disjunct whose tokens exist and whose atoms all hold.
ValidityReport check_scheduled_rules(const Schedule& stl,
                                     const std::vector<SynchronizationRule>& rules);

// check_scheduled_rules over the domain's rule set, after checking that every
// domain variable has a scheduled timeline.
ValidityReport check_scheduled_validity(const Schedule& stl, const PlanningDomain& domain);

// Whether stl is a schedule of the plan that also satisfies every committed
// relation.
bool check_instance(const Schedule& stl, const FlexiblePlan& plan, const PlanningDomain& domain);

// Rule satisfaction on the flexible plan itself: for every trigger occurrence
// some disjunct's atoms must all be literal members of the plan's relation
// set under the assignment, compared by primitive expansion. Nothing is
// re-derived from the network.
ValidityReport check_plan_satisfies_rule(const FlexiblePlan& plan, const SynchronizationRule& rule);

// Plan validity: structural soundness and coverage of the domain variables,
// every domain rule satisfied within the relation set, and every
// uncontrollable token of a planned variable carrying exactly the value's
// duration bounds with the end window they induce. Tokens already pinned to
// instants on both sides are taken as executed history and skip the window
// comparison.
ValidityReport check_plan_validity(const FlexiblePlan& plan, const PlanningDomain& domain);

// Solution-plan conditions: every planned timeline closes at [H, H], the plan
// is valid, the goal rule is satisfied within the relation set, and the
// observation timelines appear token for token.
ValidityReport check_solution(const FlexiblePlan& plan, const PlanningProblem& problem);

// Tokens of planned variables whose duration window deviates from the
// value's declared bounds. Controllable tokens are never listed.
std::vector<TokenName> check_pseudo_controllability(const FlexiblePlan& plan,
                                                    const PlanningDomain& domain);

// Draws n schedules of the plan by fixing token ends one timeline at a time,
// chronologically, uniformly within the bounds the network leaves open.
// Every result satisfies the whole relation set. Throws std::invalid_argument
// on an inconsistent plan and std::runtime_error when rejection sampling
// exhausts its retry budget.
std::vector<Schedule> sample_instances(const FlexiblePlan& plan, std::size_t n,
                                       std::uint64_t seed);

}  // namespace tbp
