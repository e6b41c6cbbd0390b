#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbp/model.hpp"
#include "tbp/plan.hpp"
#include "tbp/plan_db.hpp"

namespace tbp {

// Static dependency structure between state variables, read off the
// synchronization rules: a rule whose trigger constrains another component
// makes the trigger's variable depend on it.
struct DependencyGraph {
  std::vector<std::string> nodes;  // domain declaration order
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t index_of(const std::string& variable) const;
  bool has_edge(const std::string& from, const std::string& to) const;
};

// Builds the graph, skipping reflexive constraints and dropping any edge
// that would close a cycle.
DependencyGraph build_dependency_graph(const PlanningDomain& domain);

// Rank per variable: 0 for the most abstract components, growing towards
// the sinks. Isolated variables land on the deepest rank.
std::map<std::string, std::size_t> hierarchy_levels(const DependencyGraph& g);

enum class StrategyKind : unsigned char {
  depth_first,  // deepest node first, most recent among equals
  makespan,     // smallest makespan first, then deepest, then most recent
};

enum class FlawFilterKind : unsigned char {
  type,        // keep only the most urgent flaw kind present
  hierarchy,   // keep flaws on the most abstract variables
  fail_first,  // keep flaws with the fewest refinements
};

// Applies the filter pipeline in order. Every stage maps a nonempty set to a
// nonempty subset and preserves relative order.
std::vector<Flaw> filter_flaws(PlanDatabase& db, std::vector<Flaw> flaws,
                               const std::vector<FlawFilterKind>& pipeline,
                               const std::map<std::string, std::size_t>& levels);

struct SolverConfig {
  StrategyKind strategy = StrategyKind::depth_first;
  std::vector<FlawFilterKind> pipeline = {FlawFilterKind::type, FlawFilterKind::hierarchy,
                                          FlawFilterKind::fail_first};
  std::size_t budget_nodes = 100000;
  double budget_secs = 60.0;
  std::ostream* trace = nullptr;  // one JSON line per expansion when set
  DatabaseConfig db;
};

enum class SolveStatus : unsigned char { solution, no_solution, budget_exhausted };

struct SolveStats {
  std::size_t expansions = 0;  // nodes taken off the fringe
  std::size_t generated = 0;   // children pushed onto it
};

struct SolveResult {
  SolveStatus status = SolveStatus::no_solution;
  std::optional<FlexiblePlan> plan;
  bool pseudo_controllable = false;
  SolveStats stats;
};

// Refinement search over the plan database. Returns the first solution
// reached under the configured strategy, or reports why none was.
SolveResult solve(const PlanningProblem& problem, const SolverConfig& cfg = {});

// Like solve, but states that squeeze an uncontrollable duration are parked
// on a reserve fringe and revisited only once every clean state is spent.
// The result's pseudo_controllable flag reports which kind won.
SolveResult solve_pc(const PlanningProblem& problem, const SolverConfig& cfg = {});

std::string to_string(SolveStatus s);

}  // namespace tbp
