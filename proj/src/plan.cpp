#include "tbp/plan.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace tbp {

Bound PlanTimeline::start_window(std::size_t i) const {
  if (i >= tokens.size()) throw std::out_of_range("token index past timeline end");
  if (i == 0) return Bound(0, 0);
  return tokens[i - 1].end;
}

Bound PlanTimeline::horizon() const {
  if (tokens.empty()) return Bound(0, 0);
  return tokens.back().end;
}

std::string TokenName::text() const { return variable + "." + std::to_string(index + 1); }

std::optional<TokenName> TokenName::parse(const std::string& s) {
  auto dot = s.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) return std::nullopt;
  std::size_t ordinal = 0;
  const char* first = s.data() + dot + 1;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, ordinal);
  if (ec != std::errc() || ptr != last || ordinal == 0) return std::nullopt;
  return TokenName{s.substr(0, dot), ordinal - 1};
}

const PlanTimeline* FlexiblePlan::find_timeline(const std::string& variable) const {
  for (const auto& tl : timelines)
    if (tl.variable == variable) return &tl;
  return nullptr;
}

const PlanToken* FlexiblePlan::find_token(const TokenName& name) const {
  const PlanTimeline* tl = find_timeline(name.variable);
  if (!tl || name.index >= tl->tokens.size()) return nullptr;
  return &tl->tokens[name.index];
}

std::size_t FlexiblePlan::token_count() const {
  std::size_t n = 0;
  for (const auto& tl : timelines) n += tl.tokens.size();
  return n;
}

ticks_t ScheduledTimeline::start_of(std::size_t i) const {
  if (i >= tokens.size()) throw std::out_of_range("token index past timeline end");
  return i == 0 ? 0 : tokens[i - 1].end;
}

Interval ScheduledTimeline::interval(std::size_t i) const {
  return Interval{TimeValue::of(start_of(i)), TimeValue::of(tokens[i].end)};
}

const ScheduledTimeline* find_timeline(const Schedule& s, const std::string& variable) {
  for (const auto& tl : s)
    if (tl.variable == variable) return &tl;
  return nullptr;
}

std::vector<Diagnostic> validate_plan(const FlexiblePlan& plan, const PlanningDomain& domain) {
  std::vector<Diagnostic> out;
  auto bad = [&out](std::string where, std::string message) {
    out.push_back({std::move(where), std::move(message)});
  };

  for (const auto& tl : plan.timelines) {
    const StateVariable* var = domain.find_variable(tl.variable);
    if (!var) {
      bad(tl.variable, "plan names a variable the domain does not declare");
      continue;
    }
    if (tl.tokens.empty()) {
      bad(tl.variable, "timeline has no tokens");
      continue;
    }
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
      const PlanToken& tok = tl.tokens[i];
      std::string where = TokenName{tl.variable, i}.text();
      auto vi = var->value_index(tok.value);
      if (!vi) {
        bad(where, "value " + tok.value + " is not part of " + var->name);
        prev.reset();
        continue;
      }
      const Value& val = var->values[*vi];
      if (tok.duration.lb < val.dmin || val.dmax < tok.duration.ub)
        bad(where, "duration window " + to_string(tok.duration) + " exceeds the value's [" +
                       to_string(val.dmin) + ", " + to_string(val.dmax) + "]");
      if (prev) {
        const auto& succ = var->transitions[*prev];
        if (!std::binary_search(succ.begin(), succ.end(), *vi))
          bad(where, "no transition from " + tl.tokens[i - 1].value + " to " + tok.value);
        const Bound& before = tl.tokens[i - 1].end;
        if (tok.end.lb < before.lb || tok.end.ub < before.ub)
          bad(where, "end window precedes the predecessor's");
      }
      prev = vi;
    }
  }

  auto check_ref = [&](const TokenName& name, const char* side) {
    if (!plan.find_token(name))
      bad(name.text(), std::string("relation ") + side + " operand names no token");
  };
  for (const auto& rel : plan.relations) {
    check_ref(rel.left, "left");
    if (!rel_is_point(rel.relation.kind)) check_ref(rel.right, "right");
  }
  return out;
}

TokenPoints PlanNetwork::at(const TokenName& name) const {
  auto it = points.find(name.variable);
  if (it == points.end() || name.index >= it->second.size())
    throw std::invalid_argument("relation names unknown token " + name.text());
  return it->second[name.index];
}

PlanNetwork build_network(const FlexiblePlan& plan) {
  PlanNetwork pn;
  for (const auto& tl : plan.timelines) {
    std::vector<TokenPoints> pts;
    pts.reserve(tl.tokens.size());
    TemporalNetwork::point_id prev = TemporalNetwork::origin;
    for (const auto& tok : tl.tokens) {
      auto e = pn.net.add_time_point();
      pn.net.add_requirement(TemporalNetwork::origin, e, tok.end);
      pn.net.add_requirement(prev, e, tok.duration);
      pts.push_back({prev, e});
      prev = e;
    }
    pn.points[tl.variable] = std::move(pts);
  }
  for (const auto& rel : plan.relations) {
    TokenPoints a = pn.at(rel.left);
    TokenPoints b{};
    if (!rel_is_point(rel.relation.kind)) b = pn.at(rel.right);
    post_relation(pn.net, rel.relation, a, b);
  }
  pn.consistent = pn.net.propagate();
  return pn;
}

std::optional<Schedule> earliest_schedule(const FlexiblePlan& plan) {
  PlanNetwork pn = build_network(plan);
  if (!pn.consistent) return std::nullopt;
  Schedule out;
  out.reserve(plan.timelines.size());
  for (const auto& tl : plan.timelines) {
    ScheduledTimeline stl{tl.variable, {}};
    const auto& pts = pn.points.at(tl.variable);
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
      const PlanToken& tok = tl.tokens[i];
      ticks_t end = pn.net.bounds(pts[i].e).lb.value();
      stl.tokens.push_back({tok.value, end, tok.duration, tok.tag});
    }
    out.push_back(std::move(stl));
  }
  return out;
}

}  // namespace tbp
