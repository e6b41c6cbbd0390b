#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tbp/model.hpp"
#include "tbp/netops.hpp"
#include "tbp/plan.hpp"
#include "tbp/stn.hpp"

namespace tbp {

inline constexpr std::size_t k_no_slot = static_cast<std::size_t>(-1);

enum class TokenOrigin : unsigned char { fact, observation, goal_expansion, gap_fill };

// One token living in the database. Its temporal extent is the pair of
// network points; everything else is bookkeeping.
struct Token {
  std::size_t id = 0;
  std::string variable;
  std::string value;
  std::size_t value_index = 0;
  TemporalNetwork::point_id start_point = 0;
  TemporalNetwork::point_id end_point = 0;
  Controllability controllability = Controllability::controllable;
  TokenOrigin origin = TokenOrigin::fact;
  // Contingent link index for uncontrollable tokens with a finite upper
  // duration bound.
  std::optional<std::size_t> link;

  friend bool operator==(const Token&, const Token&) = default;
};

// Tokens are kept in creation order; the temporal order is whatever the
// network currently implies.
struct Timeline {
  std::string variable;
  bool external = false;
  std::vector<std::size_t> tokens;

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

// A committed member of the plan's relation set. Point relations leave
// `right` empty and carry their anchor inside `relation`.
struct TokenRelation {
  std::size_t left = 0;
  std::optional<std::size_t> right;
  Relation relation;

  friend bool operator==(const TokenRelation&, const TokenRelation&) = default;
};

// A goal entry: an annotated requirement that some token carry `value` on
// `variable`. Entries double as rule obligations: once a token is bound, a
// still-uninstantiated rule slot keeps the entry open.
struct GoalEntry {
  std::size_t id = 0;
  std::string variable;  // empty for the root disjunction entry
  std::string value;
  std::optional<std::size_t> token;
  std::size_t rule = k_no_slot;  // pending rule slot once bound
  bool rule_done = true;

  bool open() const { return !token.has_value() || !rule_done; }

  friend bool operator==(const GoalEntry&, const GoalEntry&) = default;
};

struct Flaw {
  enum class Kind : unsigned char {
    behavior_violation,
    unchecked_observation,
    open_goal,
    scheduling_threat,
    gap,
  };
  Kind kind = Kind::open_goal;
  std::string variable;
  std::vector<std::size_t> tokens;
  std::size_t goal = k_no_slot;
  // Marks the gap between a timeline's last token and the horizon rather
  // than a gap between two tokens.
  bool tail = false;

  friend bool operator==(const Flaw&, const Flaw&) = default;
};

std::string to_string(const Flaw& f);

// One way to solve a flaw. Nodes are only applicable at the journal depth
// they were computed at; `stamp` records it.
struct RefinementNode {
  enum class Kind : unsigned char { unify, expand, order, fill, close, anchor, verify };
  Kind kind = Kind::expand;
  std::size_t stamp = 0;
  std::size_t goal = k_no_slot;      // unify, expand
  std::size_t token = k_no_slot;     // unify target
  std::size_t rule = k_no_slot;      // expand: slot into the trigger's rule list
  std::size_t disjunct = 0;          // expand: disjunct of that rule
  std::size_t left = k_no_slot;      // order, fill
  std::size_t right = k_no_slot;     // order, fill
  std::string variable;              // fill, close, verify
  std::vector<std::size_t> values;   // fill: inserted value indices; close: appended value
  bool pin = false;                  // close: pin the last end to the horizon

  friend bool operator==(const RefinementNode&, const RefinementNode&) = default;
};

enum class ScheduleMode : unsigned char { earliest };

struct DatabaseConfig {
  std::size_t max_gap_path = 6;   // transition-path edges a gap may span
  std::size_t max_fillers = 16;   // gap-fill tokens appended per timeline
  std::size_t max_gap_nodes = 128;

  friend bool operator==(const DatabaseConfig&, const DatabaseConfig&) = default;
};

// The mutable plan representation the solver works on: tokens chained into
// timelines over a shared temporal network, the committed relation set, the
// pending goal list, and a journal making every refinement reversible.
class PlanDatabase {
 public:
  using Config = DatabaseConfig;

  // Installs facts, observations and goals; propagates. Throws
  // std::invalid_argument on a structurally invalid problem and
  // std::runtime_error when facts or observations are temporally
  // inconsistent.
  static PlanDatabase init(const PlanningProblem& problem, Config cfg = Config());

  // Installs a finished plan verbatim: timelines arrive chained, relations
  // enter the committed set, observations are verified eagerly.
  static PlanDatabase from_plan(std::shared_ptr<const PlanningDomain> domain,
                                const FlexiblePlan& plan, Config cfg = Config());

  const PlanningDomain& domain() const { return *domain_; }
  TimeValue horizon() const { return horizon_; }

  bool consistent();

  // The complete flaw set of the current state, deterministically ordered.
  // Requires a consistent network.
  std::vector<Flaw> detect_flaws();

  // Unifications with compatible existing tokens first, then one expansion
  // per disjunct of the trigger's rule. Unification nodes are kept only when
  // the network stays consistent under the merged constraints.
  std::vector<RefinementNode> goal_refinements(const Flaw& f);

  // scheduling_threat: the two orderings, each kept only if consistent.
  // gap: one node per shortest transition path (tail gaps: pin the horizon
  // or append a filler token).
  std::vector<RefinementNode> threat_refinements(const Flaw& f);

  // Dispatch over all flaw kinds, including observation verification.
  std::vector<RefinementNode> refinements(const Flaw& f);

  // Applies a node computed at the current depth; throws std::runtime_error
  // on a stale node. The journal records everything needed to undo it.
  void apply(const RefinementNode& node);
  // Undoes the most recent apply; throws std::runtime_error on an empty
  // journal.
  void retract();
  std::size_t depth() const { return journal_.size(); }

  // No flaws, consistent network, every planned timeline pinned to the
  // horizon and ending in a controllable token.
  bool is_solution();

  // Fixes every token end to its earliest network bound. Throws
  // std::runtime_error on an inconsistent network.
  Schedule extract_schedule(ScheduleMode mode = ScheduleMode::earliest);

  // The current state as a flexible plan: planned windows from the network
  // (uncontrollable ends in their induced form), observation windows
  // verbatim as given, the committed relation set, and the
  // pseudo-controllability verdict.
  FlexiblePlan to_plan();

  // Planned tokens whose contingent duration the network has squeezed.
  std::vector<std::size_t> squeezed_tokens();
  bool pseudo_controllable() { return squeezed_tokens().empty(); }

  // Largest earliest end over the planned timelines.
  ticks_t makespan();

  // Introspection.
  std::size_t token_count() const { return tokens_.size(); }
  const Token& token(std::size_t id) const;
  const Timeline* timeline(const std::string& variable) const;
  const std::vector<TokenRelation>& relations() const { return relations_; }
  const GoalEntry& goal(std::size_t id) const;
  std::vector<std::size_t> open_goals() const;
  std::size_t pending_goal_count() const { return open_goals().size(); }
  Bound start_bounds(std::size_t token_id);
  Bound end_bounds(std::size_t token_id);

  // Deep copy with an empty journal, for parallel strategies.
  PlanDatabase clone() const;

  friend bool operator==(const PlanDatabase&, const PlanDatabase&) = default;

 private:
  struct StagedAtom {
    std::size_t left_goal = k_no_slot;
    std::size_t left_token = k_no_slot;
    std::size_t right_goal = k_no_slot;
    std::size_t right_token = k_no_slot;
    Relation relation;
    bool posted = false;

    friend bool operator==(const StagedAtom&, const StagedAtom&) = default;
  };

  struct JournalEntry {
    RefinementNode node;
    TemporalNetwork::Snapshot snap;
    std::vector<TemporalNetwork::PostReceipt> receipts;
    std::size_t points = 0;
    std::size_t links = 0;
    std::size_t tokens = 0;
    std::size_t goals = 0;
    std::size_t atoms = 0;
    std::size_t rels = 0;
    std::vector<std::pair<std::size_t, std::size_t>> connected_added;
    std::vector<std::size_t> atoms_posted;
    std::vector<std::pair<std::size_t, GoalEntry>> goals_changed;
    std::vector<std::pair<std::string, std::size_t>> timeline_sizes;
    std::optional<std::string> verified;

    friend bool operator==(const JournalEntry&, const JournalEntry&) = default;
  };

  PlanDatabase() = default;

  Timeline* timeline_mut(const std::string& variable);
  const StateVariable& variable(const std::string& name) const;

  bool ordered(const Token& a, const Token& b) const;
  bool connected(std::size_t a, std::size_t b) const;
  std::optional<std::vector<std::size_t>> temporal_order(const Timeline& tl) const;
  std::vector<const SynchronizationRule*> trigger_rules(const Token& t) const;

  std::size_t create_token(const std::string& var, std::size_t value_index, TokenOrigin origin,
                           JournalEntry& j);
  void save_timeline_size(const std::string& var, JournalEntry& j);
  void spawn_obligations(std::size_t token_id, std::size_t first_slot, JournalEntry& j);
  void instantiate_rule(std::size_t goal_id, std::size_t slot, std::size_t disjunct,
                        JournalEntry& j);
  void stage_goal_atoms(const std::vector<GoalAtom>& atoms,
                        const std::map<std::string, std::size_t>& by_name, JournalEntry& j);
  void post_ready_atoms(JournalEntry& j);
  void post_meets(std::size_t a, std::size_t b, JournalEntry& j);
  bool trial(const RefinementNode& node);
  void ensure_propagated();

  std::shared_ptr<const PlanningDomain> domain_;
  TimeValue horizon_ = TimeValue::of(0);
  Config cfg_;

  TemporalNetwork net_;
  std::vector<Token> tokens_;
  std::vector<Timeline> timelines_;  // domain variable order
  std::vector<TokenRelation> relations_;
  std::vector<GoalEntry> goals_;
  std::vector<StagedAtom> atoms_;
  Goal root_goal_;  // kept for multi-disjunct goal expansion
  std::map<std::string, std::size_t> acc_ids_;
  std::set<std::pair<std::size_t, std::size_t>> connected_;
  std::set<std::string> verified_;
  // Observation windows exactly as the problem stated them, written back
  // verbatim into plans.
  std::map<std::string, std::vector<PlanToken>> obs_written_;
  std::vector<JournalEntry> journal_;
};

}  // namespace tbp
