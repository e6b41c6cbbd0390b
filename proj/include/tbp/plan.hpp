#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tbp/model.hpp"
#include "tbp/netops.hpp"
#include "tbp/relations.hpp"
#include "tbp/stn.hpp"
#include "tbp/time.hpp"

namespace tbp {

// One flexible token. Start windows are never stored: the first token of a
// timeline starts at [0,0] and every later one starts where its predecessor
// ends.
struct PlanToken {
  std::string value;
  Bound end;
  Bound duration;
  Controllability tag = Controllability::controllable;

  friend bool operator==(const PlanToken&, const PlanToken&) = default;
};

struct PlanTimeline {
  std::string variable;
  std::vector<PlanToken> tokens;

  // [0,0] for the first token, the predecessor's end window otherwise.
  Bound start_window(std::size_t i) const;
  // End window of the last token; [0,0] when empty.
  Bound horizon() const;

  friend bool operator==(const PlanTimeline&, const PlanTimeline&) = default;
};

// Names one token of a plan, e.g. the second token of timeline "cm". The
// text form "cm.2" is 1-based; the index field is 0-based.
struct TokenName {
  std::string variable;
  std::size_t index = 0;

  std::string text() const;
  static std::optional<TokenName> parse(const std::string& s);

  friend bool operator==(const TokenName&, const TokenName&) = default;
  friend auto operator<=>(const TokenName&, const TokenName&) = default;
};

// One committed relation of the plan set. Interval relations name two
// tokens; point relations name a left token and carry the anchor inside
// `relation`, leaving `right` unused.
struct PlanRelation {
  TokenName left;
  TokenName right;
  Relation relation;

  friend bool operator==(const PlanRelation&, const PlanRelation&) = default;
};

struct FlexiblePlan {
  std::string domain;
  TimeValue horizon = TimeValue::of(0);
  std::vector<PlanTimeline> timelines;
  std::vector<PlanRelation> relations;
  bool pseudo_controllable = true;

  const PlanTimeline* find_timeline(const std::string& variable) const;
  const PlanToken* find_token(const TokenName& name) const;
  std::size_t token_count() const;

  friend bool operator==(const FlexiblePlan&, const FlexiblePlan&) = default;
};

// Scheduled counterparts: end times are instants, durations and tags ride
// along verbatim. Starts derive exactly as in the flexible form.
struct ScheduledToken {
  std::string value;
  ticks_t end = 0;
  Bound duration;
  Controllability tag = Controllability::controllable;

  friend bool operator==(const ScheduledToken&, const ScheduledToken&) = default;
};

struct ScheduledTimeline {
  std::string variable;
  std::vector<ScheduledToken> tokens;

  ticks_t start_of(std::size_t i) const;
  Interval interval(std::size_t i) const;

  friend bool operator==(const ScheduledTimeline&, const ScheduledTimeline&) = default;
};

using Schedule = std::vector<ScheduledTimeline>;

const ScheduledTimeline* find_timeline(const Schedule& s, const std::string& variable);

// Structural checks against a domain: known variables and values, transitions
// respected, end windows ordered along each timeline, relation operands
// resolving to real tokens. A plan that passes is safe to hand to
// build_network and the semantic checks.
std::vector<Diagnostic> validate_plan(const FlexiblePlan& plan, const PlanningDomain& domain);

// The plan compiled into a temporal network: per timeline a chain of end
// points hanging off the origin (which doubles as every first start), one
// end-window and one duration requirement per token, and every plan relation
// posted via its primitive expansion. propagate() has already run.
struct PlanNetwork {
  TemporalNetwork net;
  std::map<std::string, std::vector<TokenPoints>> points;
  bool consistent = false;

  TokenPoints at(const TokenName& name) const;
};

// Throws std::invalid_argument on a relation naming an unknown token.
PlanNetwork build_network(const FlexiblePlan& plan);

// The schedule fixing every end to its earliest network bound. All plan
// relations live in the minimal network, so the result satisfies each of
// them. Empty when the plan is inconsistent.
std::optional<Schedule> earliest_schedule(const FlexiblePlan& plan);

}  // namespace tbp
