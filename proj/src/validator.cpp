#include "tbp/validator.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <stdexcept>

namespace tbp {

namespace {

std::string rule_label(const SynchronizationRule& rule) {
  if (rule.trigger_variable.empty()) return "goal";
  return rule.trigger_variable + "=" + rule.trigger_value;
}

const char* kind_word(Finding::Kind k) {
  switch (k) {
    case Finding::Kind::structure: return "structure";
    case Finding::Kind::coverage: return "coverage";
    case Finding::Kind::rule: return "rule";
    case Finding::Kind::window: return "window";
    case Finding::Kind::horizon: return "horizon";
    case Finding::Kind::observation: return "observation";
  }
  return "?";
}

// Generic witness search shared by the semantic and the syntactic rule
// checks. candidates() lists the tokens an annotated variable may take, in a
// fixed order; satisfied() evaluates one atom under a full assignment.
struct WitnessSearch {
  std::function<std::vector<TokenName>(const std::string&, const std::string&)> candidates;
  std::function<bool(const RuleAtom&, const std::vector<TokenName>&)> satisfied;
};

bool atom_in_range(const RuleAtom& a, std::size_t n) {
  return a.left < n && (rel_is_point(a.relation.kind) || a.right < n);
}

bool atom_uses_trigger(const RuleAtom& a) {
  return a.left == 0 || (!rel_is_point(a.relation.kind) && a.right == 0);
}

std::optional<Witness> find_witness(const SynchronizationRule& rule,
                                    const std::optional<TokenName>& trigger,
                                    const WitnessSearch& search) {
  for (std::size_t d = 0; d < rule.disjuncts.size(); ++d) {
    const Existential& ex = rule.disjuncts[d];
    std::vector<std::vector<TokenName>> cand;
    cand.reserve(ex.vars.size());
    bool feasible = true;
    for (const auto& bv : ex.vars) {
      cand.push_back(search.candidates(bv.variable, bv.value));
      if (cand.back().empty()) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;

    std::vector<std::size_t> pick(ex.vars.size(), 0);
    while (true) {
      std::vector<TokenName> assign(1 + ex.vars.size());
      if (trigger) assign[0] = *trigger;
      for (std::size_t i = 0; i < pick.size(); ++i) assign[1 + i] = cand[i][pick[i]];
      bool ok = true;
      for (const auto& atom : ex.atoms) {
        if (!atom_in_range(atom, assign.size()) || (!trigger && atom_uses_trigger(atom)) ||
            !search.satisfied(atom, assign)) {
          ok = false;
          break;
        }
      }
      if (ok) return Witness{rule_label(rule), trigger, d, std::move(assign)};
      std::size_t k = 0;
      for (; k < pick.size(); ++k) {
        if (++pick[k] < cand[k].size()) break;
        pick[k] = 0;
      }
      if (k == pick.size()) break;
    }
  }
  return std::nullopt;
}

std::vector<TokenName> tokens_with_value(const Schedule& s, const std::string& variable,
                                         const std::string& value) {
  std::vector<TokenName> out;
  if (const ScheduledTimeline* tl = find_timeline(s, variable))
    for (std::size_t i = 0; i < tl->tokens.size(); ++i)
      if (tl->tokens[i].value == value) out.push_back({variable, i});
  return out;
}

std::vector<TokenName> tokens_with_value(const FlexiblePlan& p, const std::string& variable,
                                         const std::string& value) {
  std::vector<TokenName> out;
  if (const PlanTimeline* tl = p.find_timeline(variable))
    for (std::size_t i = 0; i < tl->tokens.size(); ++i)
      if (tl->tokens[i].value == value) out.push_back({variable, i});
  return out;
}

Interval schedule_interval(const Schedule& s, const TokenName& n) {
  const ScheduledTimeline* tl = find_timeline(s, n.variable);
  if (!tl || n.index >= tl->tokens.size())
    throw std::invalid_argument("schedule has no token " + n.text());
  return tl->interval(n.index);
}

// Checks one batch of rules, collecting a witness or a finding per trigger.
ValidityReport run_rules(const std::vector<SynchronizationRule>& rules,
                         const std::function<std::vector<TokenName>(const std::string&,
                                                                    const std::string&)>& triggers,
                         const WitnessSearch& search) {
  ValidityReport report;
  for (const auto& rule : rules) {
    std::vector<std::optional<TokenName>> occurrences;
    if (rule.trigger_variable.empty())
      occurrences.push_back(std::nullopt);
    else
      for (auto& t : triggers(rule.trigger_variable, rule.trigger_value))
        occurrences.emplace_back(std::move(t));
    for (const auto& trig : occurrences) {
      if (auto w = find_witness(rule, trig, search))
        report.witnesses.push_back(std::move(*w));
      else
        report.add(Finding::Kind::rule,
                   rule_label(rule) + " has no witness" +
                       (trig ? " for trigger " + trig->text() : ""));
    }
  }
  return report;
}

// One primitive constraint pinned to concrete tokens, the currency of the
// literal-membership comparison. Swapped expansion entries are normalized by
// exchanging the operands so that equal constraints compare equal.
struct AtomInstance {
  RelKind kind = RelKind::start_before_start;
  Bound bound;
  TokenName a;
  TokenName b;
  std::optional<TimeValue> anchor;

  friend bool operator==(const AtomInstance&, const AtomInstance&) = default;
};

AtomInstance instantiate(const PrimitiveAtom& pa, const TokenName& left, const TokenName& right) {
  AtomInstance out;
  out.kind = pa.kind;
  out.bound = pa.bound;
  if (rel_is_point(pa.kind)) {
    out.a = left;
    out.anchor = pa.anchor;
  } else if (pa.swapped) {
    out.a = right;
    out.b = left;
  } else {
    out.a = left;
    out.b = right;
  }
  return out;
}

std::vector<AtomInstance> committed_atoms(const FlexiblePlan& plan) {
  std::vector<AtomInstance> out;
  for (const auto& rel : plan.relations)
    for (const auto& pa : expand_relation(rel.relation))
      out.push_back(instantiate(pa, rel.left, rel.right));
  return out;
}

Bound induced_end(const Bound& start, const Value& val) {
  TimeValue lo = TimeValue::of(sat_add(start.lb.value(), val.dmin.value()));
  TimeValue hi = (start.ub.infinite() || val.dmax.infinite())
                     ? TimeValue::inf()
                     : TimeValue::of(sat_add(start.ub.value(), val.dmax.value()));
  return Bound(lo, hi);
}

}  // namespace

std::string to_string(const Finding& f) {
  return std::string(kind_word(f.kind)) + ": " + f.message;
}

void ValidityReport::add(Finding::Kind kind, std::string message) {
  pass = false;
  findings.push_back({kind, std::move(message)});
}

void ValidityReport::merge(ValidityReport other) {
  pass = pass && other.pass;
  for (auto& f : other.findings) findings.push_back(std::move(f));
  for (auto& w : other.witnesses) witnesses.push_back(std::move(w));
}

bool check_is_schedule(const ScheduledTimeline& stl, const PlanTimeline& ftl,
                       const PlanningDomain& domain) {
  if (stl.variable != ftl.variable)
    throw std::invalid_argument("schedule pairs timelines of different variables");
  if (stl.tokens.size() != ftl.tokens.size())
    throw std::invalid_argument("schedule length differs from the flexible timeline");
  const StateVariable* var = domain.find_variable(ftl.variable);
  if (!var) throw std::invalid_argument("unknown variable " + ftl.variable);

  for (std::size_t i = 0; i < ftl.tokens.size(); ++i) {
    auto vi = var->value_index(ftl.tokens[i].value);
    if (!vi) throw std::invalid_argument("unknown value " + ftl.tokens[i].value);
    if (stl.tokens[i].value != ftl.tokens[i].value) return false;
    if (!ftl.tokens[i].end.contains(TimeValue::of(stl.tokens[i].end))) return false;
    ticks_t dur = stl.tokens[i].end - stl.start_of(i);
    if (dur < 0) return false;
    TimeValue d = TimeValue::of(dur);
    if (!ftl.tokens[i].duration.contains(d)) return false;
    const Value& val = var->values[*vi];
    if (d < val.dmin || val.dmax < d) return false;
  }
  return true;
}

bool check_is_schedule(const Schedule& stl, const FlexiblePlan& plan,
                       const PlanningDomain& domain) {
  if (stl.size() != plan.timelines.size())
    throw std::invalid_argument("schedule does not cover the plan's timelines");
  for (const auto& ftl : plan.timelines) {
    const ScheduledTimeline* s = find_timeline(stl, ftl.variable);
    if (!s) throw std::invalid_argument("schedule misses timeline " + ftl.variable);
    if (!check_is_schedule(*s, ftl, domain)) return false;
  }
  return true;
}

ValidityReport check_scheduled_rules(const Schedule& stl,
                                     const std::vector<SynchronizationRule>& rules) {
  WitnessSearch search{
      [&stl](const std::string& var, const std::string& val) {
        return tokens_with_value(stl, var, val);
      },
      [&stl](const RuleAtom& atom, const std::vector<TokenName>& assign) {
        if (rel_is_point(atom.relation.kind))
          return holds(atom.relation, schedule_interval(stl, assign[atom.left]));
        return holds(atom.relation, schedule_interval(stl, assign[atom.left]),
                     schedule_interval(stl, assign[atom.right]));
      }};
  return run_rules(
      rules,
      [&stl](const std::string& var, const std::string& val) {
        return tokens_with_value(stl, var, val);
      },
      search);
}

ValidityReport check_scheduled_validity(const Schedule& stl, const PlanningDomain& domain) {
  ValidityReport report;
  for (const auto& var : domain.variables)
    if (!find_timeline(stl, var.name))
      report.add(Finding::Kind::coverage, "no scheduled timeline for variable " + var.name);
  report.merge(check_scheduled_rules(stl, domain.rules));
  return report;
}

bool check_instance(const Schedule& stl, const FlexiblePlan& plan, const PlanningDomain& domain) {
  if (!check_is_schedule(stl, plan, domain)) return false;
  for (const auto& rel : plan.relations) {
    if (rel_is_point(rel.relation.kind)) {
      if (!holds(rel.relation, schedule_interval(stl, rel.left))) return false;
    } else if (!holds(rel.relation, schedule_interval(stl, rel.left),
                      schedule_interval(stl, rel.right))) {
      return false;
    }
  }
  return true;
}

ValidityReport check_plan_satisfies_rule(const FlexiblePlan& plan,
                                         const SynchronizationRule& rule) {
  std::vector<AtomInstance> committed = committed_atoms(plan);
  WitnessSearch search{
      [&plan](const std::string& var, const std::string& val) {
        return tokens_with_value(plan, var, val);
      },
      [&plan, &committed](const RuleAtom& atom, const std::vector<TokenName>& assign) {
        bool point = rel_is_point(atom.relation.kind);
        const TokenName& left = assign[atom.left];
        const TokenName& right = point ? left : assign[atom.right];
        for (const auto& pa : expand_relation(atom.relation)) {
          AtomInstance want = instantiate(pa, left, right);
          if (std::find(committed.begin(), committed.end(), want) == committed.end())
            return false;
        }
        return true;
      }};
  return run_rules(
      {rule},
      [&plan](const std::string& var, const std::string& val) {
        return tokens_with_value(plan, var, val);
      },
      search);
}

ValidityReport check_plan_validity(const FlexiblePlan& plan, const PlanningDomain& domain) {
  ValidityReport report;
  for (const auto& d : validate_plan(plan, domain))
    report.add(Finding::Kind::structure, d.where + ": " + d.message);
  for (const auto& var : domain.variables)
    if (!plan.find_timeline(var.name))
      report.add(Finding::Kind::coverage, "no timeline for variable " + var.name);
  for (const auto& rule : domain.rules) report.merge(check_plan_satisfies_rule(plan, rule));

  for (const auto& tl : plan.timelines) {
    const StateVariable* var = domain.find_variable(tl.variable);
    if (!var || var->external) continue;
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
      const PlanToken& tok = tl.tokens[i];
      if (tok.tag != Controllability::uncontrollable) continue;
      Bound start = tl.start_window(i);
      if (start.singleton() && tok.end.singleton()) continue;
      auto vi = var->value_index(tok.value);
      if (!vi) continue;
      const Value& val = var->values[*vi];
      std::string where = TokenName{tl.variable, i}.text();
      Bound declared(val.dmin, val.dmax);
      if (tok.duration != declared)
        report.add(Finding::Kind::window, where + " duration window " + to_string(tok.duration) +
                                              " is not the declared " + to_string(declared));
      Bound want = induced_end(start, val);
      if (tok.end != want)
        report.add(Finding::Kind::window, where + " end window " + to_string(tok.end) +
                                              " is not the induced " + to_string(want));
    }
  }
  return report;
}

ValidityReport check_solution(const FlexiblePlan& plan, const PlanningProblem& problem) {
  ValidityReport report;
  const PlanningDomain& domain = *problem.domain;

  if (problem.horizon.infinite()) {
    report.add(Finding::Kind::horizon, "problem horizon is unbounded");
  } else {
    Bound close(problem.horizon, problem.horizon);
    for (const auto& var : domain.variables) {
      if (var.external) continue;
      const PlanTimeline* tl = plan.find_timeline(var.name);
      if (tl && tl->horizon() != close)
        report.add(Finding::Kind::horizon, var.name + " closes at " + to_string(tl->horizon()) +
                                               " instead of " + to_string(close));
    }
  }

  report.merge(check_plan_validity(plan, domain));
  report.merge(check_plan_satisfies_rule(plan, goal_to_rule(problem.goal)));

  for (const auto& obs : problem.observations) {
    const PlanTimeline* tl = plan.find_timeline(obs.variable);
    if (!tl) {
      report.add(Finding::Kind::observation, "observed timeline " + obs.variable + " is missing");
      continue;
    }
    if (tl->tokens.size() != obs.tokens.size()) {
      report.add(Finding::Kind::observation,
                 obs.variable + " token count differs from the observation");
      continue;
    }
    for (std::size_t i = 0; i < obs.tokens.size(); ++i) {
      const PlanToken& got = tl->tokens[i];
      const TokenSpec& want = obs.tokens[i];
      if (got.value != want.value || got.end != want.end || got.duration != want.duration)
        report.add(Finding::Kind::observation,
                   TokenName{obs.variable, i}.text() + " differs from the observation");
    }
  }
  return report;
}

std::vector<TokenName> check_pseudo_controllability(const FlexiblePlan& plan,
                                                    const PlanningDomain& domain) {
  std::vector<TokenName> out;
  PlanNetwork pn = build_network(plan);
  for (const auto& tl : plan.timelines) {
    const StateVariable* var = domain.find_variable(tl.variable);
    if (!var || var->external) continue;
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
      const PlanToken& tok = tl.tokens[i];
      if (tok.tag != Controllability::uncontrollable) continue;
      if (tl.start_window(i).singleton() && tok.end.singleton()) continue;
      auto vi = var->value_index(tok.value);
      if (!vi) continue;
      const Value& val = var->values[*vi];
      if (tok.duration != Bound(val.dmin, val.dmax)) {
        out.push_back({tl.variable, i});
        continue;
      }
      // The declared window may survive on paper while the plan's other
      // windows and relations pinch the achievable range underneath it.
      if (!pn.consistent || val.dmax.infinite()) continue;
      const TokenPoints& tp = pn.points.at(tl.variable)[i];
      auto d = pn.net.distance(tp.s, tp.e);
      if (d.lo != val.dmin.value() || d.hi != val.dmax.value())
        out.push_back({tl.variable, i});
    }
  }
  return out;
}

std::vector<Schedule> sample_instances(const FlexiblePlan& plan, std::size_t n,
                                       std::uint64_t seed) {
  PlanNetwork pn = build_network(plan);
  if (!pn.consistent) throw std::invalid_argument("plan is inconsistent");
  TemporalNetwork& net = pn.net;
  auto base = net.snapshot();
  std::mt19937_64 rng(seed);
  ticks_t cap = plan.horizon.infinite() ? 0 : plan.horizon.value();

  std::vector<Schedule> out;
  out.reserve(n);
  std::vector<TemporalNetwork::PostReceipt> posted;
  std::size_t attempts = 0;
  const std::size_t budget = 100 * std::max<std::size_t>(n, 1);
  while (out.size() < n) {
    if (++attempts > budget)
      throw std::runtime_error("instance sampling exceeded its rejection budget");
    posted.clear();
    bool feasible = true;
    for (const auto& tl : plan.timelines) {
      const auto& pts = pn.points.at(tl.variable);
      for (const auto& tp : pts) {
        Bound b = net.bounds(tp.e);
        ticks_t lo = b.lb.value();
        ticks_t hi = b.ub.infinite() ? std::max(cap, lo + 100) : b.ub.value();
        std::uniform_int_distribution<ticks_t> pick(lo, hi);
        ticks_t t = pick(rng);
        posted.push_back(net.add_requirement(TemporalNetwork::origin, tp.e, Bound(t, t)));
        if (!net.propagate()) {
          feasible = false;
          break;
        }
      }
      if (!feasible) break;
    }
    if (feasible) {
      Schedule s;
      s.reserve(plan.timelines.size());
      for (const auto& tl : plan.timelines) {
        ScheduledTimeline stl{tl.variable, {}};
        const auto& pts = pn.points.at(tl.variable);
        for (std::size_t i = 0; i < tl.tokens.size(); ++i)
          stl.tokens.push_back({tl.tokens[i].value, net.bounds(pts[i].e).lb.value(),
                                tl.tokens[i].duration, tl.tokens[i].tag});
        s.push_back(std::move(stl));
      }
      out.push_back(std::move(s));
    }
    for (auto it = posted.rbegin(); it != posted.rend(); ++it) net.unpost(*it);
    net.restore(base);
  }
  return out;
}

}  // namespace tbp
