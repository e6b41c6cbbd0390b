#include "tbp/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "tbp/netops.hpp"
#include "tbp/stn.hpp"

namespace tbp {

namespace {

constexpr std::size_t k_numeric_cap = 128;
constexpr std::size_t k_disjunct_cap = 4096;

bool is_var(const std::string& t) { return !t.empty() && t[0] == '?'; }

// Ordered variable environment; small enough that linear lookup wins.
using Env = std::vector<std::pair<std::string, std::string>>;

const std::string* env_get(const Env& env, const std::string& name) {
  for (const auto& [k, v] : env)
    if (k == name) return &v;
  return nullptr;
}

// Named finite domains in first-occurrence order.
struct VarTable {
  std::vector<std::pair<std::string, std::vector<std::string>>> vars;

  // Re-adding a name intersects its domain, preserving member order.
  void add(const std::string& name, const std::vector<std::string>& members) {
    for (auto& [k, dom] : vars) {
      if (k != name) continue;
      std::vector<std::string> kept;
      for (const auto& m : dom)
        if (std::find(members.begin(), members.end(), m) != members.end()) kept.push_back(m);
      dom = std::move(kept);
      return;
    }
    vars.emplace_back(name, members);
  }

  const std::vector<std::string>* domain(const std::string& name) const {
    for (const auto& [k, dom] : vars)
      if (k == name) return &dom;
    return nullptr;
  }
};

// Calls fn once per assignment of the given variables, in domain order.
void enumerate(const std::vector<std::pair<std::string, std::vector<std::string>>>& vars,
               const std::function<void(const Env&)>& fn) {
  Env env;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == vars.size()) {
      fn(env);
      return;
    }
    for (const auto& member : vars[i].second) {
      env.emplace_back(vars[i].first, member);
      rec(i + 1);
      env.pop_back();
    }
  };
  rec(0);
}

const LiftedValue* find_value_decl(const LiftedType& t, const std::string& name,
                                   std::size_t arity) {
  for (const auto& v : t.values)
    if (v.name == name && v.params.size() == arity) return &v;
  return nullptr;
}

}  // namespace

std::string to_string(const Diagnostic& d) { return d.where + ": " + d.message; }

std::vector<std::string> ParameterDomain::members() const {
  if (!numeric) return symbols;
  std::vector<std::string> out;
  for (ticks_t v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
  return out;
}

std::string render_value_name(const std::string& base, const std::vector<std::string>& args) {
  if (args.empty()) return base;
  std::string out = base + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i];
  }
  out += ")";
  return out;
}

std::optional<std::size_t> StateVariable::value_index(const std::string& v) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i].name == v) return i;
  return std::nullopt;
}

const StateVariable* PlanningDomain::find_variable(const std::string& n) const {
  for (const auto& sv : variables)
    if (sv.name == n) return &sv;
  return nullptr;
}

std::vector<const SynchronizationRule*> PlanningDomain::rules_for(const std::string& variable,
                                                                  const std::string& value) const {
  std::vector<const SynchronizationRule*> out;
  for (const auto& r : rules)
    if (r.trigger_variable == variable && r.trigger_value == value) out.push_back(&r);
  return out;
}

std::vector<Diagnostic> validate_domain(const PlanningDomain& d) {
  std::vector<Diagnostic> diags;
  auto diag = [&](std::string where, std::string msg) {
    diags.push_back({std::move(where), std::move(msg)});
  };

  if (d.horizon.infinite() || d.horizon.value() <= 0)
    diag(d.name, "planning horizon must be positive and finite");

  std::set<std::string> names;
  for (const auto& sv : d.variables) {
    if (!names.insert(sv.name).second) diag(sv.name, "duplicate state variable name");
    if (sv.values.empty()) {
      diag(sv.name, "state variable has no values");
      continue;
    }
    if (sv.transitions.size() != sv.values.size())
      diag(sv.name, "transition table does not match value list");
    std::set<std::string> vnames;
    for (std::size_t i = 0; i < sv.values.size(); ++i) {
      const Value& v = sv.values[i];
      const std::string where = sv.name + "." + v.name;
      if (!vnames.insert(v.name).second) diag(where, "duplicate value name");
      if (v.dmin.infinite() || v.dmin.value() < 1) diag(where, "duration lower bound must be at least 1");
      if (!v.dmax.infinite() && v.dmax < v.dmin) diag(where, "duration bounds are inverted");
      if (v.tag == Controllability::uncontrollable && v.dmax.infinite())
        diag(where, "uncontrollable value needs a finite duration upper bound");
      if (sv.external && v.tag == Controllability::controllable)
        diag(where, "external variables admit only uncontrollable values");
      if (i < sv.transitions.size()) {
        if (sv.transitions[i].empty()) diag(where, "value has no successor");
        for (std::size_t succ : sv.transitions[i])
          if (succ >= sv.values.size()) diag(where, "transition to unknown value index");
      }
    }
  }

  for (const auto& r : d.rules) {
    const std::string where = r.trigger_variable + "." + r.trigger_value;
    if (r.trigger_variable.empty()) {
      diag(where, "domain rule without a trigger");
      continue;
    }
    const StateVariable* sv = d.find_variable(r.trigger_variable);
    if (!sv) {
      diag(where, "rule triggers on unknown state variable");
      continue;
    }
    if (!sv->value_index(r.trigger_value)) diag(where, "rule triggers on unknown value");
    for (const auto& ex : r.disjuncts) {
      for (const auto& bv : ex.vars) {
        const StateVariable* target = d.find_variable(bv.variable);
        if (!target)
          diag(where, "rule binds unknown state variable " + bv.variable);
        else if (!target->value_index(bv.value))
          diag(where, "rule binds unknown value " + bv.variable + "." + bv.value);
      }
      for (const auto& atom : ex.atoms) {
        if (atom.left > ex.vars.size() || (!rel_is_point(atom.relation.kind) && atom.right > ex.vars.size()))
          diag(where, "rule atom references a token out of range");
      }
    }
  }
  return diags;
}

SynchronizationRule goal_to_rule(const Goal& g) {
  SynchronizationRule rule;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.accomplishments.size(); ++i) {
    if (!index.emplace(g.accomplishments[i].name, i + 1).second)
      throw std::invalid_argument("duplicate accomplishment name " + g.accomplishments[i].name);
  }
  auto resolve = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("goal atom names unknown accomplishment " + name);
    return it->second;
  };

  std::vector<std::vector<GoalAtom>> conjuncts = g.relational;
  if (conjuncts.empty()) conjuncts.push_back({});
  for (const auto& conjunct : conjuncts) {
    Existential ex;
    for (const auto& a : g.accomplishments) ex.vars.push_back({a.variable, a.value});
    for (const auto& atom : conjunct) {
      RuleAtom ra;
      ra.left = resolve(atom.left);
      ra.right = rel_is_point(atom.relation.kind) ? 0 : resolve(atom.right);
      ra.relation = atom.relation;
      ex.atoms.push_back(std::move(ra));
    }
    rule.disjuncts.push_back(std::move(ex));
  }
  return rule;
}

std::vector<Diagnostic> validate_problem(const PlanningProblem& p) {
  std::vector<Diagnostic> diags;
  auto diag = [&](std::string where, std::string msg) {
    diags.push_back({std::move(where), std::move(msg)});
  };
  if (!p.domain) {
    diag(p.name, "problem has no domain");
    return diags;
  }
  const PlanningDomain& d = *p.domain;
  if (p.horizon.infinite() || p.horizon.value() <= 0)
    diag(p.name, "problem horizon must be positive and finite");

  // Tokens pinned on both sides record an executed past; their durations may
  // legitimately sit outside the declared bounds, so the check skips them.
  auto pinned = [](const TokenSpec& t) { return t.start.singleton() && t.end.singleton(); };
  auto check_token = [&](const TokenSpec& t, const StateVariable& sv, std::string where) {
    auto vi = sv.value_index(t.value);
    if (!vi) {
      diag(where, "unknown value " + t.value);
      return;
    }
    const Value& v = sv.values[*vi];
    if (!pinned(t) && (t.duration.lb < v.dmin || v.dmax < t.duration.ub))
      diag(where, "duration window exceeds the declared bounds of " + t.value);
  };

  std::map<std::string, std::vector<const TokenSpec*>> facts_by_var;
  for (const auto& f : p.facts) {
    const std::string where = p.name + " fact " + f.variable + "." + f.value;
    const StateVariable* sv = d.find_variable(f.variable);
    if (!sv) {
      diag(where, "unknown state variable");
      continue;
    }
    if (sv->external) {
      diag(where, "facts may only target planned variables");
      continue;
    }
    check_token(f, *sv, where);
    facts_by_var[f.variable].push_back(&f);
  }
  for (const auto& [var, toks] : facts_by_var) {
    const StateVariable* sv = d.find_variable(var);
    if (!toks.empty() && !(toks.front()->start == Bound(0, 0)))
      diag(var, "the first fact must start at time zero");
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      auto from = sv->value_index(toks[i]->value);
      auto to = sv->value_index(toks[i + 1]->value);
      if (!from || !to) continue;
      const auto& succ = sv->transitions[*from];
      if (std::find(succ.begin(), succ.end(), *to) == succ.end())
        diag(var, "facts " + toks[i]->value + " -> " + toks[i + 1]->value + " violate the transition relation");
      if (!(toks[i + 1]->start == toks[i]->end))
        diag(var, "consecutive facts must share their meeting window");
    }
  }

  std::map<std::string, const ObservationTimeline*> obs_by_var;
  for (const auto& tl : p.observations) {
    const StateVariable* sv = d.find_variable(tl.variable);
    if (!sv) {
      diag(tl.variable, "observation for unknown state variable");
      continue;
    }
    if (!sv->external) {
      diag(tl.variable, "observations may only target external variables");
      continue;
    }
    if (!obs_by_var.emplace(tl.variable, &tl).second) {
      diag(tl.variable, "duplicate observation timeline");
      continue;
    }
    if (tl.tokens.empty()) {
      diag(tl.variable, "observation timeline is empty");
      continue;
    }
    if (!(tl.tokens.front().start == Bound(0, 0)))
      diag(tl.variable, "the first observation must start at time zero");
    for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
      const TokenSpec& t = tl.tokens[i];
      check_token(t, *sv, tl.variable + "[" + std::to_string(i) + "]");
      if (i == 0) continue;
      auto from = sv->value_index(tl.tokens[i - 1].value);
      auto to = sv->value_index(t.value);
      if (from && to) {
        const auto& succ = sv->transitions[*from];
        if (std::find(succ.begin(), succ.end(), *to) == succ.end())
          diag(tl.variable, "observed " + tl.tokens[i - 1].value + " -> " + t.value +
                                " violates the transition relation");
      }
      if (!(t.start == tl.tokens[i - 1].end))
        diag(tl.variable, "consecutive observations must share their meeting window");
    }
    if (tl.tokens.back().end.lb < p.horizon)
      diag(tl.variable, "observation timeline stops short of the horizon");
  }
  for (const auto& sv : d.variables)
    if (sv.external && !obs_by_var.count(sv.name))
      diag(sv.name, "external variable lacks an observation timeline");

  // Windows, durations and cross-timeline relations must admit a schedule.
  TemporalNetwork net;
  std::map<std::string, std::vector<TokenPoints>> points;
  for (const auto& [var, tl] : obs_by_var) {
    TemporalNetwork::point_id prev_end = 0;
    for (std::size_t i = 0; i < tl->tokens.size(); ++i) {
      const TokenSpec& t = tl->tokens[i];
      const auto s = i == 0 ? net.add_time_point() : prev_end;
      const auto e = net.add_time_point();
      net.add_requirement(TemporalNetwork::origin, s, t.start);
      net.add_requirement(TemporalNetwork::origin, e, t.end);
      net.add_requirement(s, e, t.duration);
      points[var].push_back({s, e});
      prev_end = e;
    }
  }
  bool refs_ok = true;
  auto resolve_ref = [&](const ObsTokenRef& r) -> const TokenPoints* {
    auto it = points.find(r.variable);
    if (it == points.end() || r.index >= it->second.size()) {
      diag(r.variable, "observation relation references a missing token");
      refs_ok = false;
      return nullptr;
    }
    return &it->second[r.index];
  };
  for (const auto& rel : p.obs_relations) {
    const TokenPoints* a = resolve_ref(rel.left);
    const TokenPoints* b = rel_is_point(rel.relation.kind) ? a : resolve_ref(rel.right);
    if (a && b) post_relation(net, rel.relation, *a, *b);
  }
  if (refs_ok && !net.propagate()) diag(p.name, "observation windows are inconsistent");

  std::set<std::string> goal_names;
  for (const auto& a : p.goal.accomplishments) {
    const std::string where = p.name + " goal " + a.name;
    if (!goal_names.insert(a.name).second) diag(where, "duplicate accomplishment name");
    const StateVariable* sv = d.find_variable(a.variable);
    if (!sv) {
      diag(where, "unknown state variable " + a.variable);
      continue;
    }
    if (sv->external) diag(where, "goals may only target planned variables");
    if (!sv->value_index(a.value)) diag(where, "unknown value " + a.value);
  }
  for (const auto& conjunct : p.goal.relational) {
    for (const auto& atom : conjunct) {
      if (!goal_names.count(atom.left))
        diag(p.name, "goal atom names unknown accomplishment " + atom.left);
      if (!rel_is_point(atom.relation.kind) && !goal_names.count(atom.right))
        diag(p.name, "goal atom names unknown accomplishment " + atom.right);
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

GroundResult ground(const LiftedDomain& L) {
  std::vector<Diagnostic> diags;
  auto diag = [&](std::string where, std::string msg) {
    diags.push_back({std::move(where), std::move(msg)});
  };

  std::map<std::string, std::vector<std::string>> pdoms;
  for (const auto& pd : L.parameters) {
    if (pdoms.count(pd.name)) {
      diag(pd.name, "duplicate parameter domain");
      continue;
    }
    if (pd.numeric && pd.hi < pd.lo) {
      diag(pd.name, "numeric domain bounds are inverted");
      continue;
    }
    if (pd.numeric && static_cast<std::size_t>(pd.hi - pd.lo + 1) > k_numeric_cap) {
      diag(pd.name, "numeric domain exceeds " + std::to_string(k_numeric_cap) + " values");
      continue;
    }
    auto members = pd.members();
    if (members.empty()) {
      diag(pd.name, "parameter domain is empty");
      continue;
    }
    pdoms.emplace(pd.name, std::move(members));
  }

  auto members_of = [&](const std::string& type, const std::string& where) -> const std::vector<std::string>* {
    auto it = pdoms.find(type);
    if (it == pdoms.end()) {
      diag(where, "unknown parameter domain " + type);
      return nullptr;
    }
    return &it->second;
  };

  std::map<std::string, const LiftedType*> types;
  for (const auto& t : L.types) {
    if (!types.emplace(t.name, &t).second) diag(t.name, "duplicate component type");
  }

  PlanningDomain D;
  D.name = L.name;
  D.horizon = L.horizon;

  std::map<std::string, const LiftedType*> comp_type;
  for (const auto& c : L.components) {
    auto it = types.find(c.type);
    if (it == types.end()) {
      diag(c.name, "component uses unknown type " + c.type);
      continue;
    }
    if (comp_type.count(c.name)) {
      diag(c.name, "duplicate component name");
      continue;
    }
    comp_type.emplace(c.name, it->second);
    const LiftedType& t = *it->second;

    StateVariable sv;
    sv.name = c.name;
    sv.external = t.external;

    // Ground values first so transitions can resolve indices.
    std::unordered_map<std::string, std::size_t> vindex;
    struct GroundInstance {
      const LiftedValue* decl;
      Env env;
      std::size_t index;
    };
    std::vector<GroundInstance> instances;
    for (const auto& lv : t.values) {
      const std::string where = c.name + "." + lv.name;
      if (lv.params.size() != lv.param_types.size()) {
        diag(where, "parameter list does not match its type list");
        continue;
      }
      std::vector<std::pair<std::string, std::vector<std::string>>> vars;
      bool ok = true;
      for (std::size_t i = 0; i < lv.params.size(); ++i) {
        const auto* members = members_of(lv.param_types[i], where);
        if (!members) {
          ok = false;
          break;
        }
        vars.emplace_back(lv.params[i], *members);
      }
      if (!ok) continue;
      enumerate(vars, [&](const Env& env) {
        std::vector<std::string> args;
        for (const auto& p : lv.params) args.push_back(*env_get(env, p));
        Value v;
        v.name = render_value_name(lv.name, args);
        v.dmin = lv.dmin;
        v.dmax = lv.dmax;
        // Values of an external variable are uncontrollable whether tagged or not.
        v.tag = t.external ? Controllability::uncontrollable : lv.tag;
        if (vindex.count(v.name)) {
          diag(c.name, "duplicate ground value " + v.name);
          return;
        }
        vindex.emplace(v.name, sv.values.size());
        instances.push_back({&lv, env, sv.values.size()});
        sv.values.push_back(std::move(v));
      });
    }

    sv.transitions.assign(sv.values.size(), {});
    for (const auto& inst : instances) {
      const LiftedValue& lv = *inst.decl;
      const std::string where = c.name + "." + lv.name;
      // The MEETS block is one scope: source parameters stay bound, fresh
      // names from any successor range over their domains, and constraints
      // filter the joint assignment.
      VarTable block;
      struct SuccInfo {
        const LiftedValue::Successor* succ;
      };
      std::vector<SuccInfo> usable;
      for (const auto& succ : lv.successors) {
        const LiftedValue* sdecl = find_value_decl(t, succ.value, succ.args.size());
        if (!sdecl) {
          diag(where, "transition targets an unknown value " + succ.value);
          continue;
        }
        bool ok = true;
        for (std::size_t i = 0; i < succ.args.size(); ++i) {
          const std::string& arg = succ.args[i];
          const auto* members = members_of(sdecl->param_types[i], where);
          if (!members) {
            ok = false;
            break;
          }
          if (is_var(arg)) {
            if (!env_get(inst.env, arg)) block.add(arg, *members);
          } else if (std::find(members->begin(), members->end(), arg) == members->end()) {
            diag(where, "literal " + arg + " is not in domain " + sdecl->param_types[i]);
            ok = false;
            break;
          }
        }
        if (ok) usable.push_back({&succ});
      }
      bool constraint_diag = false;
      enumerate(block.vars, [&](const Env& free_env) {
        auto resolve = [&](const std::string& term) -> const std::string* {
          if (!is_var(term)) return &term;
          if (const auto* v = env_get(inst.env, term)) return v;
          return env_get(free_env, term);
        };
        for (const auto& cons : lv.constraints) {
          const std::string* lhs = resolve(cons.lhs);
          const std::string* rhs = resolve(cons.rhs);
          if (!lhs || !rhs) {
            if (!constraint_diag) diag(where, "constraint references an unknown parameter");
            constraint_diag = true;
            return;
          }
          if ((*lhs == *rhs) != cons.equal) return;
        }
        for (const auto& si : usable) {
          std::vector<std::string> args;
          for (const auto& a : si.succ->args) args.push_back(*resolve(a));
          auto target = vindex.find(render_value_name(si.succ->value, args));
          if (target == vindex.end()) continue;
          sv.transitions[inst.index].push_back(target->second);
        }
      });
      auto& edges = sv.transitions[inst.index];
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    D.variables.push_back(std::move(sv));
  }

  for (const auto& r : L.rules) {
    const std::string where = r.component + "." + r.trigger_value;
    auto ct = comp_type.find(r.component);
    if (ct == comp_type.end()) {
      diag(where, "rule triggers on unknown component");
      continue;
    }
    const LiftedValue* tdecl = find_value_decl(*ct->second, r.trigger_value, r.trigger_params.size());
    if (!tdecl) {
      diag(where, "rule triggers on unknown value");
      continue;
    }

    VarTable table;
    std::vector<std::pair<std::string, std::vector<std::string>>> trigger_vars;
    bool ok = true;
    for (std::size_t i = 0; i < r.trigger_params.size(); ++i) {
      if (!is_var(r.trigger_params[i])) {
        diag(where, "trigger parameters must be variables");
        ok = false;
        break;
      }
      const auto* members = members_of(tdecl->param_types[i], where);
      if (!members) {
        ok = false;
        break;
      }
      table.add(r.trigger_params[i], *members);
    }
    if (!ok) continue;

    struct CondInfo {
      const LiftedCondition* cond;
      const LiftedValue* decl;
    };
    std::vector<CondInfo> conds;
    std::map<std::string, std::size_t> labels;
    for (const auto& cond : r.conditions) {
      auto cct = comp_type.find(cond.component);
      if (cct == comp_type.end()) {
        diag(where, "condition on unknown component " + cond.component);
        ok = false;
        break;
      }
      const LiftedValue* cdecl = find_value_decl(*cct->second, cond.value, cond.args.size());
      if (!cdecl) {
        diag(where, "condition on unknown value " + cond.component + "." + cond.value);
        ok = false;
        break;
      }
      if (!cond.label.empty() && !labels.emplace(cond.label, conds.size() + 1).second) {
        diag(where, "duplicate condition label " + cond.label);
        ok = false;
        break;
      }
      for (std::size_t i = 0; i < cond.args.size(); ++i) {
        const auto* members = members_of(cdecl->param_types[i], where);
        if (!members) {
          ok = false;
          break;
        }
        if (is_var(cond.args[i]))
          table.add(cond.args[i], *members);
        else if (std::find(members->begin(), members->end(), cond.args[i]) == members->end()) {
          diag(where, "literal " + cond.args[i] + " is not in domain " + cdecl->param_types[i]);
          ok = false;
        }
      }
      if (!ok) break;
      conds.push_back({&cond, cdecl});
    }
    if (!ok) continue;

    auto label_index = [&](const std::string& label) -> std::optional<std::size_t> {
      if (label.empty()) return 0;  // the trigger token
      auto it = labels.find(label);
      if (it == labels.end()) return std::nullopt;
      return it->second;
    };
    for (const auto& rel : r.relations) {
      if (!label_index(rel.left) || (!rel_is_point(rel.kind) && !label_index(rel.right))) {
        diag(where, "relation references an unknown condition label");
        ok = false;
      }
      if (static_cast<int>(rel.bounds.size()) != rel_arity(rel.kind) ||
          rel_is_point(rel.kind) != rel.anchor.has_value()) {
        diag(where, "malformed " + rel_name(rel.kind) + " relation");
        ok = false;
      }
    }
    if (!ok) continue;

    std::vector<std::pair<std::string, std::vector<std::string>>> free_vars;
    for (const auto& [name, dom] : table.vars) {
      if (std::find(r.trigger_params.begin(), r.trigger_params.end(), name) == r.trigger_params.end())
        free_vars.emplace_back(name, dom);
    }
    for (const auto& p : r.trigger_params) trigger_vars.emplace_back(p, *table.domain(p));

    std::size_t product = 1;
    for (const auto& [name, dom] : free_vars) {
      product *= std::max<std::size_t>(dom.size(), 1);
      if (product > k_disjunct_cap) break;
    }
    if (product > k_disjunct_cap) {
      diag(where, "rule grounding exceeds " + std::to_string(k_disjunct_cap) + " disjuncts");
      continue;
    }

    enumerate(trigger_vars, [&](const Env& tenv) {
      SynchronizationRule rule;
      rule.trigger_variable = r.component;
      std::vector<std::string> targs;
      for (const auto& p : r.trigger_params) targs.push_back(*env_get(tenv, p));
      rule.trigger_value = render_value_name(r.trigger_value, targs);

      enumerate(free_vars, [&](const Env& fenv) {
        auto resolve = [&](const std::string& term) -> const std::string* {
          if (!is_var(term)) return &term;
          if (const auto* v = env_get(tenv, term)) return v;
          return env_get(fenv, term);
        };
        for (const auto& cons : r.constraints) {
          const std::string* lhs = resolve(cons.lhs);
          const std::string* rhs = resolve(cons.rhs);
          if (!lhs || !rhs) {
            diag(where, "constraint references an unknown parameter");
            return;
          }
          if ((*lhs == *rhs) != cons.equal) return;
        }
        Existential ex;
        for (const auto& ci : conds) {
          std::vector<std::string> args;
          for (const auto& a : ci.cond->args) {
            const std::string* v = resolve(a);
            if (!v) {
              diag(where, "condition argument " + a + " is unbound");
              return;
            }
            args.push_back(*v);
          }
          ex.vars.push_back({ci.cond->component, render_value_name(ci.cond->value, args)});
        }
        for (const auto& rel : r.relations) {
          RuleAtom atom;
          atom.left = *label_index(rel.left);
          atom.right = rel_is_point(rel.kind) ? 0 : *label_index(rel.right);
          atom.relation = Relation(rel.kind, rel.bounds, rel.anchor);
          ex.atoms.push_back(std::move(atom));
        }
        rule.disjuncts.push_back(std::move(ex));
      });
      D.rules.push_back(std::move(rule));
    });
  }

  if (!diags.empty()) return {std::nullopt, std::move(diags)};
  return {std::move(D), {}};
}

}  // namespace tbp
