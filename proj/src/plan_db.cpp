#include "tbp/plan_db.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace tbp {

namespace {

int flaw_rank(Flaw::Kind k) {
  switch (k) {
    case Flaw::Kind::behavior_violation: return 0;
    case Flaw::Kind::unchecked_observation: return 1;
    case Flaw::Kind::open_goal: return 2;
    case Flaw::Kind::scheduling_threat: return 3;
    case Flaw::Kind::gap: return 4;
  }
  return 5;
}

bool flaw_less(const Flaw& a, const Flaw& b) {
  int ra = flaw_rank(a.kind), rb = flaw_rank(b.kind);
  if (ra != rb) return ra < rb;
  if (a.variable != b.variable) return a.variable < b.variable;
  if (a.goal != b.goal) return a.goal < b.goal;
  if (a.tail != b.tail) return b.tail;
  return a.tokens < b.tokens;
}

std::string ids_text(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += "t" + std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::string to_string(const Flaw& f) {
  switch (f.kind) {
    case Flaw::Kind::behavior_violation:
      return "behavior violation on " + f.variable + " (" + ids_text(f.tokens) + ")";
    case Flaw::Kind::unchecked_observation:
      return "unchecked observations on " + f.variable;
    case Flaw::Kind::open_goal:
      return "open goal g" + std::to_string(f.goal) +
             (f.variable.empty() ? std::string() : " " + f.variable);
    case Flaw::Kind::scheduling_threat:
      return "scheduling threat on " + f.variable + " (" + ids_text(f.tokens) + ")";
    case Flaw::Kind::gap:
      if (f.tail) return "tail gap on " + f.variable;
      if (f.tokens.size() == 1) return "head gap on " + f.variable;
      return "gap on " + f.variable + " (" + ids_text(f.tokens) + ")";
  }
  return "flaw";
}

// ---------------------------------------------------------------------------
// Lookup helpers
// ---------------------------------------------------------------------------

Timeline* PlanDatabase::timeline_mut(const std::string& variable) {
  for (auto& tl : timelines_)
    if (tl.variable == variable) return &tl;
  return nullptr;
}

const Timeline* PlanDatabase::timeline(const std::string& variable) const {
  for (const auto& tl : timelines_)
    if (tl.variable == variable) return &tl;
  return nullptr;
}

const StateVariable& PlanDatabase::variable(const std::string& name) const {
  const StateVariable* sv = domain_->find_variable(name);
  if (!sv) throw std::logic_error("unknown state variable " + name);
  return *sv;
}

const Token& PlanDatabase::token(std::size_t id) const { return tokens_.at(id); }

const GoalEntry& PlanDatabase::goal(std::size_t id) const { return goals_.at(id); }

std::vector<std::size_t> PlanDatabase::open_goals() const {
  std::vector<std::size_t> out;
  for (const auto& g : goals_)
    if (g.open()) out.push_back(g.id);
  return out;
}

Bound PlanDatabase::start_bounds(std::size_t token_id) {
  ensure_propagated();
  return net_.bounds(tokens_.at(token_id).start_point);
}

Bound PlanDatabase::end_bounds(std::size_t token_id) {
  ensure_propagated();
  return net_.bounds(tokens_.at(token_id).end_point);
}

void PlanDatabase::ensure_propagated() {
  if (net_.stale()) net_.propagate();
}

bool PlanDatabase::consistent() {
  ensure_propagated();
  return net_.consistent();
}

PlanDatabase PlanDatabase::clone() const {
  PlanDatabase copy = *this;
  copy.journal_.clear();
  return copy;
}

// ---------------------------------------------------------------------------
// Temporal structure
// ---------------------------------------------------------------------------

bool PlanDatabase::ordered(const Token& a, const Token& b) const {
  return net_.distance(a.end_point, b.start_point).lo >= 0;
}

bool PlanDatabase::connected(std::size_t a, std::size_t b) const {
  return connected_.count({a, b}) != 0;
}

// The timeline's tokens sorted into their temporal order, or nothing when
// some pair is not yet ordered either way.
std::optional<std::vector<std::size_t>> PlanDatabase::temporal_order(const Timeline& tl) const {
  std::vector<std::size_t> seq = tl.tokens;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      const Token& a = tokens_[seq[i]];
      const Token& b = tokens_[seq[j]];
      if (!ordered(a, b) && !ordered(b, a)) return std::nullopt;
    }
  std::sort(seq.begin(), seq.end(), [&](std::size_t x, std::size_t y) {
    const Token& a = tokens_[x];
    const Token& b = tokens_[y];
    ticks_t asl = net_.bounds(a.start_point).lb.v, bsl = net_.bounds(b.start_point).lb.v;
    if (asl != bsl) return asl < bsl;
    ticks_t ael = net_.bounds(a.end_point).lb.v, bel = net_.bounds(b.end_point).lb.v;
    if (ael != bel) return ael < bel;
    return x < y;
  });
  return seq;
}

std::vector<const SynchronizationRule*> PlanDatabase::trigger_rules(const Token& t) const {
  return domain_->rules_for(t.variable, t.value);
}

// ---------------------------------------------------------------------------
// Mutation helpers (everything journaled through `j`)
// ---------------------------------------------------------------------------

void PlanDatabase::save_timeline_size(const std::string& var, JournalEntry& j) {
  for (const auto& [name, size] : j.timeline_sizes)
    if (name == var) return;
  j.timeline_sizes.emplace_back(var, timeline(var)->tokens.size());
}

std::size_t PlanDatabase::create_token(const std::string& var, std::size_t value_index,
                                       TokenOrigin origin, JournalEntry& j) {
  const StateVariable& sv = variable(var);
  const Value& val = sv.values.at(value_index);
  Token t;
  t.id = tokens_.size();
  t.variable = var;
  t.value = val.name;
  t.value_index = value_index;
  t.start_point = net_.add_time_point();
  t.end_point = net_.add_time_point();
  t.controllability = val.tag;
  t.origin = origin;
  if (!horizon_.infinite())
    j.receipts.push_back(
        net_.add_requirement(TemporalNetwork::origin, t.end_point, Bound(0, horizon_.value())));
  if (val.tag == Controllability::uncontrollable && !val.dmax.infinite()) {
    TemporalNetwork::PostReceipt r{};
    t.link = net_.mark_contingent(t.start_point, t.end_point, val.dmin, val.dmax, &r);
    j.receipts.push_back(r);
  } else {
    Bound d = val.dmax.infinite() ? unbounded_above(val.dmin.value()) : Bound(val.dmin, val.dmax);
    j.receipts.push_back(net_.add_requirement(t.start_point, t.end_point, d));
  }
  save_timeline_size(var, j);
  tokens_.push_back(t);
  timeline_mut(var)->tokens.push_back(t.id);
  return t.id;
}

void PlanDatabase::spawn_obligations(std::size_t token_id, std::size_t first_slot,
                                     JournalEntry& j) {
  (void)j;  // creation is undone by resizing to the journaled count
  const Token& t = tokens_[token_id];
  auto rules = trigger_rules(t);
  for (std::size_t slot = first_slot; slot < rules.size(); ++slot) {
    GoalEntry g;
    g.id = goals_.size();
    g.variable = t.variable;
    g.value = t.value;
    g.token = token_id;
    g.rule = slot;
    g.rule_done = false;
    goals_.push_back(std::move(g));
  }
}

void PlanDatabase::stage_goal_atoms(const std::vector<GoalAtom>& atoms,
                                    const std::map<std::string, std::size_t>& by_name,
                                    JournalEntry& j) {
  (void)j;
  for (const auto& atom : atoms) {
    auto li = by_name.find(atom.left);
    if (li == by_name.end()) throw std::invalid_argument("goal atom names unknown accomplishment " + atom.left);
    StagedAtom a;
    a.relation = atom.relation;
    a.left_goal = li->second;
    if (!rel_is_point(atom.relation.kind)) {
      auto ri = by_name.find(atom.right);
      if (ri == by_name.end())
        throw std::invalid_argument("goal atom names unknown accomplishment " + atom.right);
      a.right_goal = ri->second;
    }
    atoms_.push_back(std::move(a));
  }
}

void PlanDatabase::post_ready_atoms(JournalEntry& j) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    StagedAtom& a = atoms_[i];
    if (a.posted) continue;
    auto resolve = [&](std::size_t tok, std::size_t goal) -> std::optional<std::size_t> {
      if (tok != k_no_slot) return tok;
      if (goal == k_no_slot) return std::nullopt;
      const auto& bound = goals_[goal].token;
      if (!bound || *bound == k_no_slot) return std::nullopt;
      return *bound;
    };
    auto lt = resolve(a.left_token, a.left_goal);
    if (!lt) continue;
    bool point = rel_is_point(a.relation.kind);
    std::optional<std::size_t> rt;
    if (!point) {
      rt = resolve(a.right_token, a.right_goal);
      if (!rt) continue;
    }
    TokenPoints pa{tokens_[*lt].start_point, tokens_[*lt].end_point};
    TokenPoints pb = point ? pa : TokenPoints{tokens_[*rt].start_point, tokens_[*rt].end_point};
    auto receipts = post_relation(net_, a.relation, pa, pb);
    j.receipts.insert(j.receipts.end(), receipts.begin(), receipts.end());
    relations_.push_back({*lt, point ? std::nullopt : rt, a.relation});
    a.posted = true;
    j.atoms_posted.push_back(i);
  }
}

void PlanDatabase::post_meets(std::size_t a, std::size_t b, JournalEntry& j) {
  j.receipts.push_back(
      net_.add_requirement(tokens_[a].end_point, tokens_[b].start_point, Bound(0, 0)));
  if (connected_.insert({a, b}).second) j.connected_added.push_back({a, b});
}

void PlanDatabase::instantiate_rule(std::size_t goal_id, std::size_t slot, std::size_t disjunct,
                                    JournalEntry& j) {
  const GoalEntry snap = goals_[goal_id];
  auto rules = domain_->rules_for(snap.variable, snap.value);
  const SynchronizationRule* rule = rules.at(slot);
  const Existential& ex = rule->disjuncts.at(disjunct);
  std::size_t trigger = *snap.token;

  // Operand 0 is the trigger token; operand i >= 1 becomes a fresh sub-goal.
  std::vector<std::size_t> operand_goal(ex.vars.size() + 1, k_no_slot);
  for (std::size_t i = 0; i < ex.vars.size(); ++i) {
    GoalEntry g;
    g.id = goals_.size();
    g.variable = ex.vars[i].variable;
    g.value = ex.vars[i].value;
    operand_goal[i + 1] = g.id;
    goals_.push_back(std::move(g));
  }
  for (const auto& atom : ex.atoms) {
    StagedAtom a;
    a.relation = atom.relation;
    if (atom.left == 0)
      a.left_token = trigger;
    else
      a.left_goal = operand_goal.at(atom.left);
    if (!rel_is_point(atom.relation.kind)) {
      if (atom.right == 0)
        a.right_token = trigger;
      else
        a.right_goal = operand_goal.at(atom.right);
    }
    atoms_.push_back(std::move(a));
  }
  if (goal_id < j.goals) j.goals_changed.emplace_back(goal_id, snap);
  goals_[goal_id].rule_done = true;
  goals_[goal_id].rule = slot;
  post_ready_atoms(j);
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

PlanDatabase PlanDatabase::init(const PlanningProblem& problem, Config cfg) {
  auto diags = validate_problem(problem);
  if (!diags.empty()) throw std::invalid_argument(to_string(diags.front()));

  PlanDatabase db;
  db.domain_ = problem.domain;
  db.horizon_ = problem.horizon;
  db.cfg_ = cfg;
  for (const auto& sv : problem.domain->variables)
    db.timelines_.push_back({sv.name, sv.external, {}});

  JournalEntry scratch;  // init is permanent; nothing here is ever undone

  for (const auto& spec : problem.facts) {
    const StateVariable& sv = db.variable(spec.variable);
    auto vi = sv.value_index(spec.value);
    if (!vi) throw std::invalid_argument("fact value unknown: " + spec.value);
    std::size_t tid = db.create_token(spec.variable, *vi, TokenOrigin::fact, scratch);
    const Token& t = db.tokens_[tid];
    db.net_.add_requirement(TemporalNetwork::origin, t.start_point, spec.start);
    db.net_.add_requirement(TemporalNetwork::origin, t.end_point, spec.end);
    db.net_.add_requirement(t.start_point, t.end_point, spec.duration);
    db.spawn_obligations(tid, 0, scratch);
  }

  for (const auto& obs : problem.observations) {
    std::size_t prev = k_no_slot;
    for (const auto& spec : obs.tokens) {
      const StateVariable& sv = db.variable(spec.variable);
      auto vi = sv.value_index(spec.value);
      if (!vi) throw std::invalid_argument("observation value unknown: " + spec.value);
      std::size_t tid = db.create_token(spec.variable, *vi, TokenOrigin::observation, scratch);
      const Token& t = db.tokens_[tid];
      db.net_.add_requirement(TemporalNetwork::origin, t.start_point, spec.start);
      db.net_.add_requirement(TemporalNetwork::origin, t.end_point, spec.end);
      db.net_.add_requirement(t.start_point, t.end_point, spec.duration);
      if (prev != k_no_slot) db.post_meets(prev, tid, scratch);
      prev = tid;
      db.obs_written_[obs.variable].push_back(
          {spec.value, spec.end, spec.duration, sv.values[*vi].tag});
      db.spawn_obligations(tid, 0, scratch);
    }
  }

  for (const auto& rel : problem.obs_relations) {
    auto resolve = [&](const ObsTokenRef& ref) -> std::size_t {
      const Timeline* tl = db.timeline(ref.variable);
      if (!tl || ref.index >= tl->tokens.size())
        throw std::invalid_argument("observation relation names a missing token");
      return tl->tokens[ref.index];
    };
    std::size_t lt = resolve(rel.left);
    bool point = rel_is_point(rel.relation.kind);
    std::size_t rt = point ? lt : resolve(rel.right);
    TokenPoints pa{db.tokens_[lt].start_point, db.tokens_[lt].end_point};
    TokenPoints pb{db.tokens_[rt].start_point, db.tokens_[rt].end_point};
    post_relation(db.net_, rel.relation, pa, pb);
    db.relations_.push_back({lt, point ? std::nullopt : std::optional<std::size_t>(rt), rel.relation});
  }

  std::map<std::string, std::size_t> acc_ids;
  for (const auto& acc : problem.goal.accomplishments) {
    GoalEntry g;
    g.id = db.goals_.size();
    g.variable = acc.variable;
    g.value = acc.value;
    acc_ids[acc.name] = g.id;
    db.goals_.push_back(std::move(g));
  }
  db.acc_ids_ = acc_ids;
  if (problem.goal.relational.size() == 1) {
    db.stage_goal_atoms(problem.goal.relational.front(), acc_ids, scratch);
  } else if (problem.goal.relational.size() > 1) {
    GoalEntry root;
    root.id = db.goals_.size();
    root.token = k_no_slot;  // sentinel: the root binds no token
    root.rule_done = false;
    db.goals_.push_back(std::move(root));
    db.root_goal_ = problem.goal;
  }

  if (!db.net_.propagate())
    throw std::runtime_error("facts and observations are temporally inconsistent");
  return db;
}

PlanDatabase PlanDatabase::from_plan(std::shared_ptr<const PlanningDomain> domain,
                                     const FlexiblePlan& plan, Config cfg) {
  auto diags = validate_plan(plan, *domain);
  if (!diags.empty()) throw std::invalid_argument(to_string(diags.front()));

  PlanDatabase db;
  db.domain_ = domain;
  db.horizon_ = plan.horizon;
  db.cfg_ = cfg;
  for (const auto& sv : domain->variables) db.timelines_.push_back({sv.name, sv.external, {}});

  JournalEntry scratch;
  for (const auto& sv : domain->variables) {
    const PlanTimeline* pt = plan.find_timeline(sv.name);
    if (!pt) continue;
    std::size_t prev = k_no_slot;
    for (std::size_t i = 0; i < pt->tokens.size(); ++i) {
      const PlanToken& pk = pt->tokens[i];
      auto vi = sv.value_index(pk.value);
      std::size_t tid = db.create_token(
          sv.name, *vi, sv.external ? TokenOrigin::observation : TokenOrigin::fact, scratch);
      const Token& t = db.tokens_[tid];
      db.net_.add_requirement(TemporalNetwork::origin, t.end_point, pk.end);
      db.net_.add_requirement(t.start_point, t.end_point, pk.duration);
      if (prev == k_no_slot)
        db.net_.add_requirement(TemporalNetwork::origin, t.start_point, Bound(0, 0));
      else
        db.post_meets(prev, tid, scratch);
      prev = tid;
    }
    if (sv.external) {
      db.obs_written_[sv.name] = pt->tokens;
      db.verified_.insert(sv.name);
    }
  }

  for (const auto& rel : plan.relations) {
    auto resolve = [&](const TokenName& name) {
      return db.timeline(name.variable)->tokens.at(name.index);
    };
    std::size_t lt = resolve(rel.left);
    bool point = rel_is_point(rel.relation.kind);
    std::size_t rt = point ? lt : resolve(rel.right);
    TokenPoints pa{db.tokens_[lt].start_point, db.tokens_[lt].end_point};
    TokenPoints pb{db.tokens_[rt].start_point, db.tokens_[rt].end_point};
    post_relation(db.net_, rel.relation, pa, pb);
    db.relations_.push_back({lt, point ? std::nullopt : std::optional<std::size_t>(rt), rel.relation});
  }

  if (!db.net_.propagate()) throw std::runtime_error("plan is temporally inconsistent");
  return db;
}

// ---------------------------------------------------------------------------
// Flaw detection
// ---------------------------------------------------------------------------

std::vector<Flaw> PlanDatabase::detect_flaws() {
  ensure_propagated();
  if (!net_.consistent()) throw std::logic_error("flaw detection requires a consistent network");

  std::vector<Flaw> out;
  for (const auto& g : goals_)
    if (g.open()) out.push_back({Flaw::Kind::open_goal, g.variable, {}, g.id, false});

  for (const auto& tl : timelines_) {
    if (tl.external) {
      if (!verified_.count(tl.variable))
        out.push_back({Flaw::Kind::unchecked_observation, tl.variable, {}, k_no_slot, false});
      continue;
    }
    auto order = temporal_order(tl);
    if (!order) {
      for (std::size_t i = 0; i < tl.tokens.size(); ++i)
        for (std::size_t j = i + 1; j < tl.tokens.size(); ++j) {
          const Token& a = tokens_[tl.tokens[i]];
          const Token& b = tokens_[tl.tokens[j]];
          if (!ordered(a, b) && !ordered(b, a))
            out.push_back({Flaw::Kind::scheduling_threat,
                           tl.variable,
                           {tl.tokens[i], tl.tokens[j]},
                           k_no_slot,
                           false});
        }
      continue;
    }
    const auto& seq = *order;
    const StateVariable& sv = variable(tl.variable);
    if (!seq.empty() && net_.bounds(tokens_[seq.front()].start_point) != Bound(0, 0))
      out.push_back({Flaw::Kind::gap, tl.variable, {seq.front()}, k_no_slot, false});
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      std::size_t a = seq[k], b = seq[k + 1];
      if (!connected(a, b)) {
        out.push_back({Flaw::Kind::gap, tl.variable, {a, b}, k_no_slot, false});
      } else {
        const auto& succ = sv.transitions[tokens_[a].value_index];
        if (!std::binary_search(succ.begin(), succ.end(), tokens_[b].value_index))
          out.push_back({Flaw::Kind::behavior_violation, tl.variable, {a, b}, k_no_slot, false});
      }
    }
    if (!horizon_.infinite()) {
      if (seq.empty()) {
        out.push_back({Flaw::Kind::gap, tl.variable, {}, k_no_slot, true});
      } else {
        const Token& last = tokens_[seq.back()];
        Bound be = net_.bounds(last.end_point);
        if (!(be.lb == horizon_ && be.ub == horizon_) ||
            last.controllability == Controllability::uncontrollable)
          out.push_back({Flaw::Kind::gap, tl.variable, {seq.back()}, k_no_slot, true});
      }
    }
  }

  std::sort(out.begin(), out.end(), flaw_less);
  return out;
}

// ---------------------------------------------------------------------------
// Refinement enumeration
// ---------------------------------------------------------------------------

bool PlanDatabase::trial(const RefinementNode& node) {
  apply(node);
  bool ok = consistent();
  retract();
  return ok;
}

std::vector<RefinementNode> PlanDatabase::goal_refinements(const Flaw& f) {
  std::vector<RefinementNode> out;
  if (f.goal == k_no_slot || f.goal >= goals_.size()) return out;
  const GoalEntry g = goals_[f.goal];
  if (!g.open()) return out;
  std::size_t stamp = journal_.size();
  auto keep = [&](RefinementNode n) {
    if (trial(n)) out.push_back(std::move(n));
  };

  if (g.variable.empty()) {
    for (std::size_t d = 0; d < root_goal_.relational.size(); ++d) {
      RefinementNode n;
      n.kind = RefinementNode::Kind::expand;
      n.stamp = stamp;
      n.goal = f.goal;
      n.rule = 0;
      n.disjunct = d;
      keep(std::move(n));
    }
    return out;
  }

  if (!g.token) {
    const Timeline* tl = timeline(g.variable);
    for (std::size_t tid : tl->tokens) {
      if (tokens_[tid].value != g.value) continue;
      RefinementNode n;
      n.kind = RefinementNode::Kind::unify;
      n.stamp = stamp;
      n.goal = f.goal;
      n.token = tid;
      keep(std::move(n));
    }
    if (!variable(g.variable).external) {
      auto rules = domain_->rules_for(g.variable, g.value);
      std::size_t disjuncts = rules.empty() ? 1 : rules.front()->disjuncts.size();
      for (std::size_t d = 0; d < disjuncts; ++d) {
        RefinementNode n;
        n.kind = RefinementNode::Kind::expand;
        n.stamp = stamp;
        n.goal = f.goal;
        n.rule = rules.empty() ? k_no_slot : 0;
        n.disjunct = d;
        keep(std::move(n));
      }
    }
    return out;
  }

  // Bound entry: a rule obligation awaiting its disjunct choice.
  auto rules = domain_->rules_for(g.variable, g.value);
  const SynchronizationRule* rule = rules.at(g.rule);
  for (std::size_t d = 0; d < rule->disjuncts.size(); ++d) {
    RefinementNode n;
    n.kind = RefinementNode::Kind::expand;
    n.stamp = stamp;
    n.goal = f.goal;
    n.rule = g.rule;
    n.disjunct = d;
    keep(std::move(n));
  }
  return out;
}

std::vector<RefinementNode> PlanDatabase::threat_refinements(const Flaw& f) {
  std::vector<RefinementNode> out;
  std::size_t stamp = journal_.size();
  auto keep = [&](RefinementNode n) {
    if (trial(n)) out.push_back(std::move(n));
  };

  if (f.kind == Flaw::Kind::scheduling_threat) {
    for (int dir = 0; dir < 2; ++dir) {
      RefinementNode n;
      n.kind = RefinementNode::Kind::order;
      n.stamp = stamp;
      n.left = f.tokens.at(dir == 0 ? 0 : 1);
      n.right = f.tokens.at(dir == 0 ? 1 : 0);
      keep(std::move(n));
    }
    return out;
  }
  if (f.kind != Flaw::Kind::gap) return out;

  const StateVariable& sv = variable(f.variable);
  if (f.tail) {
    const Timeline* tl = timeline(f.variable);
    if (f.tokens.empty()) {
      for (std::size_t v = 0; v < sv.values.size(); ++v) {
        RefinementNode n;
        n.kind = RefinementNode::Kind::close;
        n.stamp = stamp;
        n.variable = f.variable;
        n.values = {v};
        keep(std::move(n));
      }
      return out;
    }
    std::size_t last = f.tokens.front();
    if (tokens_[last].controllability == Controllability::controllable) {
      RefinementNode n;
      n.kind = RefinementNode::Kind::close;
      n.stamp = stamp;
      n.variable = f.variable;
      n.token = last;
      n.pin = true;
      keep(std::move(n));
    }
    std::size_t fillers = 0;
    for (std::size_t tid : tl->tokens)
      if (tokens_[tid].origin == TokenOrigin::gap_fill) ++fillers;
    if (fillers < cfg_.max_fillers) {
      for (std::size_t v : sv.transitions[tokens_[last].value_index]) {
        RefinementNode n;
        n.kind = RefinementNode::Kind::close;
        n.stamp = stamp;
        n.variable = f.variable;
        n.token = last;
        n.values = {v};
        keep(std::move(n));
      }
    }
    return out;
  }

  if (f.tokens.size() == 1) {
    // Head gap: the first token does not yet start at time zero. Anchor it
    // there, or prepend a token whose value can transition into it.
    std::size_t first = f.tokens.front();
    {
      RefinementNode n;
      n.kind = RefinementNode::Kind::anchor;
      n.stamp = stamp;
      n.variable = f.variable;
      n.token = first;
      n.pin = true;
      keep(std::move(n));
    }
    const Timeline* tl = timeline(f.variable);
    std::size_t fillers = 0;
    for (std::size_t tid : tl->tokens)
      if (tokens_[tid].origin == TokenOrigin::gap_fill) ++fillers;
    if (fillers < cfg_.max_fillers) {
      std::size_t want = tokens_[first].value_index;
      for (std::size_t v = 0; v < sv.values.size(); ++v) {
        const auto& succ = sv.transitions[v];
        if (!std::binary_search(succ.begin(), succ.end(), want)) continue;
        RefinementNode n;
        n.kind = RefinementNode::Kind::anchor;
        n.stamp = stamp;
        n.variable = f.variable;
        n.token = first;
        n.values = {v};
        keep(std::move(n));
      }
    }
    return out;
  }

  // A gap between two ordered tokens: every shortest transition path, each
  // one node inserting its intermediate values.
  std::size_t src = tokens_[f.tokens.at(0)].value_index;
  std::size_t dst = tokens_[f.tokens.at(1)].value_index;
  std::size_t n = sv.values.size();
  std::vector<int> dist(n, -1);
  std::deque<std::size_t> queue;
  for (std::size_t v : sv.transitions[src])
    if (dist[v] < 0) {
      dist[v] = 1;
      queue.push_back(v);
    }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : sv.transitions[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  if (dist[dst] < 0 || static_cast<std::size_t>(dist[dst]) > cfg_.max_gap_path) return out;

  // Walk back from dst along decreasing BFS levels, emitting paths in
  // ascending value order.
  std::vector<std::size_t> tail;
  auto emit = [&](auto&& self, std::size_t cur, int level) -> void {
    if (out.size() >= cfg_.max_gap_nodes) return;
    if (level == 1) {
      const auto& succ = sv.transitions[src];
      if (!std::binary_search(succ.begin(), succ.end(), cur)) return;
      RefinementNode node;
      node.kind = RefinementNode::Kind::fill;
      node.stamp = stamp;
      node.variable = f.variable;
      node.left = f.tokens[0];
      node.right = f.tokens[1];
      node.values.assign(tail.rbegin(), tail.rend());
      node.values.pop_back();  // drop dst itself; only intermediates are inserted
      keep(std::move(node));
      return;
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (dist[p] != level - 1) continue;
      const auto& succ = sv.transitions[p];
      if (!std::binary_search(succ.begin(), succ.end(), cur)) continue;
      tail.push_back(p);
      self(self, p, level - 1);
      tail.pop_back();
    }
  };
  tail.push_back(dst);
  emit(emit, dst, dist[dst]);
  return out;
}

std::vector<RefinementNode> PlanDatabase::refinements(const Flaw& f) {
  switch (f.kind) {
    case Flaw::Kind::open_goal:
      return goal_refinements(f);
    case Flaw::Kind::scheduling_threat:
    case Flaw::Kind::gap:
      return threat_refinements(f);
    case Flaw::Kind::behavior_violation:
      return {};
    case Flaw::Kind::unchecked_observation: {
      const Timeline* tl = timeline(f.variable);
      if (!tl || tl->tokens.empty()) return {};
      ensure_propagated();
      if (!net_.consistent()) return {};
      const StateVariable& sv = variable(f.variable);
      for (std::size_t k = 0; k + 1 < tl->tokens.size(); ++k) {
        std::size_t a = tl->tokens[k], b = tl->tokens[k + 1];
        if (!connected(a, b)) return {};
        const auto& succ = sv.transitions[tokens_[a].value_index];
        if (!std::binary_search(succ.begin(), succ.end(), tokens_[b].value_index)) return {};
      }
      if (net_.bounds(tokens_[tl->tokens.front()].start_point) != Bound(0, 0)) return {};
      if (!horizon_.infinite()) {
        Bound be = net_.bounds(tokens_[tl->tokens.back()].end_point);
        if (!(be.lb == horizon_ && be.ub == horizon_)) return {};
      }
      RefinementNode n;
      n.kind = RefinementNode::Kind::verify;
      n.stamp = journal_.size();
      n.variable = f.variable;
      return {n};
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Apply / retract
// ---------------------------------------------------------------------------

void PlanDatabase::apply(const RefinementNode& node) {
  if (node.stamp != journal_.size()) throw std::runtime_error("refinement node is stale");
  ensure_propagated();
  JournalEntry j;
  j.node = node;
  j.snap = net_.snapshot();
  j.points = net_.point_count();
  j.links = net_.link_count();
  j.tokens = tokens_.size();
  j.goals = goals_.size();
  j.atoms = atoms_.size();
  j.rels = relations_.size();

  switch (node.kind) {
    case RefinementNode::Kind::unify: {
      GoalEntry snap = goals_.at(node.goal);
      if (snap.token) throw std::logic_error("goal already bound");
      const Token& t = tokens_.at(node.token);
      if (t.variable != snap.variable || t.value != snap.value)
        throw std::logic_error("unification target mismatch");
      j.goals_changed.emplace_back(node.goal, snap);
      goals_[node.goal].token = node.token;
      post_ready_atoms(j);
      break;
    }
    case RefinementNode::Kind::expand: {
      GoalEntry snap = goals_.at(node.goal);
      if (snap.variable.empty()) {
        stage_goal_atoms(root_goal_.relational.at(node.disjunct), acc_ids_, j);
        j.goals_changed.emplace_back(node.goal, snap);
        goals_[node.goal].rule_done = true;
        post_ready_atoms(j);
        break;
      }
      if (!snap.token) {
        if (variable(snap.variable).external)
          throw std::logic_error("cannot expand a goal onto an external variable");
        auto vi = variable(snap.variable).value_index(snap.value);
        if (!vi) throw std::logic_error("goal value unknown: " + snap.value);
        std::size_t tid = create_token(snap.variable, *vi, TokenOrigin::goal_expansion, j);
        j.goals_changed.emplace_back(node.goal, snap);
        goals_[node.goal].token = tid;
        if (node.rule != k_no_slot) {
          instantiate_rule(node.goal, node.rule, node.disjunct, j);
          spawn_obligations(tid, node.rule + 1, j);
        }
        post_ready_atoms(j);
        break;
      }
      instantiate_rule(node.goal, node.rule, node.disjunct, j);
      break;
    }
    case RefinementNode::Kind::order: {
      j.receipts.push_back(net_.add_requirement(tokens_.at(node.left).end_point,
                                                tokens_.at(node.right).start_point,
                                                unbounded_above(0)));
      break;
    }
    case RefinementNode::Kind::fill: {
      std::size_t prev = node.left;
      for (std::size_t v : node.values) {
        std::size_t tid = create_token(node.variable, v, TokenOrigin::gap_fill, j);
        post_meets(prev, tid, j);
        spawn_obligations(tid, 0, j);
        prev = tid;
      }
      post_meets(prev, node.right, j);
      break;
    }
    case RefinementNode::Kind::close: {
      if (node.pin) {
        j.receipts.push_back(net_.add_requirement(
            TemporalNetwork::origin, tokens_.at(node.token).end_point,
            Bound(horizon_, horizon_)));
        break;
      }
      std::size_t v = node.values.at(0);
      std::size_t tid = create_token(node.variable, v, TokenOrigin::gap_fill, j);
      if (node.token == k_no_slot)
        j.receipts.push_back(net_.add_requirement(TemporalNetwork::origin,
                                                  tokens_[tid].start_point, Bound(0, 0)));
      else
        post_meets(node.token, tid, j);
      spawn_obligations(tid, 0, j);
      break;
    }
    case RefinementNode::Kind::anchor: {
      if (node.pin) {
        j.receipts.push_back(net_.add_requirement(
            TemporalNetwork::origin, tokens_.at(node.token).start_point, Bound(0, 0)));
        break;
      }
      std::size_t v = node.values.at(0);
      std::size_t tid = create_token(node.variable, v, TokenOrigin::gap_fill, j);
      post_meets(tid, node.token, j);
      spawn_obligations(tid, 0, j);
      break;
    }
    case RefinementNode::Kind::verify: {
      if (!verified_.insert(node.variable).second)
        throw std::logic_error("observations already verified");
      j.verified = node.variable;
      break;
    }
  }

  journal_.push_back(std::move(j));
  net_.propagate();
}

void PlanDatabase::retract() {
  if (journal_.empty()) throw std::runtime_error("nothing to retract");
  JournalEntry j = std::move(journal_.back());
  journal_.pop_back();

  for (auto it = j.receipts.rbegin(); it != j.receipts.rend(); ++it) net_.unpost(*it);
  while (net_.link_count() > j.links) net_.drop_last_contingent();
  net_.shrink_points(j.points);
  net_.restore(std::move(j.snap));

  tokens_.resize(j.tokens);
  for (const auto& [var, size] : j.timeline_sizes) timeline_mut(var)->tokens.resize(size);
  for (auto it = j.goals_changed.rbegin(); it != j.goals_changed.rend(); ++it)
    goals_.at(it->first) = it->second;
  goals_.resize(j.goals);
  for (std::size_t idx : j.atoms_posted) atoms_.at(idx).posted = false;
  atoms_.resize(j.atoms);
  relations_.resize(j.rels);
  for (const auto& pr : j.connected_added) connected_.erase(pr);
  if (j.verified) verified_.erase(*j.verified);
}

// ---------------------------------------------------------------------------
// Solution checks and extraction
// ---------------------------------------------------------------------------

bool PlanDatabase::is_solution() {
  if (!consistent()) return false;
  if (!detect_flaws().empty()) return false;
  for (const auto& tl : timelines_) {
    if (tl.external) continue;
    auto order = temporal_order(tl);
    if (!order || order->empty()) return false;
    const Token& first = tokens_[order->front()];
    if (net_.bounds(first.start_point).lb != TimeValue::of(0)) return false;
    const Token& last = tokens_[order->back()];
    if (last.controllability != Controllability::controllable) return false;
  }
  return true;
}

Schedule PlanDatabase::extract_schedule(ScheduleMode mode) {
  (void)mode;
  ensure_propagated();
  if (!net_.consistent()) throw std::runtime_error("cannot schedule an inconsistent network");

  Schedule out;
  for (const auto& tl : timelines_) {
    if (tl.tokens.empty()) continue;
    std::vector<std::size_t> seq = tl.tokens;
    std::sort(seq.begin(), seq.end(), [&](std::size_t x, std::size_t y) {
      const Token& a = tokens_[x];
      const Token& b = tokens_[y];
      ticks_t asl = net_.bounds(a.start_point).lb.v, bsl = net_.bounds(b.start_point).lb.v;
      if (asl != bsl) return asl < bsl;
      ticks_t ael = net_.bounds(a.end_point).lb.v, bel = net_.bounds(b.end_point).lb.v;
      if (ael != bel) return ael < bel;
      return x < y;
    });
    ScheduledTimeline st;
    st.variable = tl.variable;
    for (std::size_t tid : seq) {
      const Token& t = tokens_[tid];
      ScheduledToken k;
      k.value = t.value;
      k.end = net_.bounds(t.end_point).lb.v;
      k.tag = t.controllability;
      const Value& val = variable(tl.variable).values[t.value_index];
      if (t.controllability == Controllability::uncontrollable) {
        k.duration = Bound(val.dmin, val.dmax);
      } else {
        auto d = net_.distance(t.start_point, t.end_point);
        k.duration = Bound(d.lo, d.hi);
      }
      st.tokens.push_back(std::move(k));
    }
    out.push_back(std::move(st));
  }
  return out;
}

FlexiblePlan PlanDatabase::to_plan() {
  ensure_propagated();
  if (!net_.consistent()) throw std::runtime_error("cannot export an inconsistent network");

  FlexiblePlan plan;
  plan.domain = domain_->name;
  plan.horizon = horizon_;
  std::map<std::size_t, TokenName> names;

  for (const auto& tl : timelines_) {
    PlanTimeline pt;
    pt.variable = tl.variable;
    if (tl.external) {
      auto it = obs_written_.find(tl.variable);
      if (it != obs_written_.end()) pt.tokens = it->second;
      for (std::size_t i = 0; i < tl.tokens.size(); ++i)
        names[tl.tokens[i]] = {tl.variable, i};
      plan.timelines.push_back(std::move(pt));
      continue;
    }
    auto order = temporal_order(tl);
    if (!order) throw std::runtime_error("timeline " + tl.variable + " has no settled order");
    Bound prev_end(0, 0);
    for (std::size_t i = 0; i < order->size(); ++i) {
      std::size_t tid = (*order)[i];
      const Token& t = tokens_[tid];
      names[tid] = {tl.variable, i};
      const Value& val = variable(tl.variable).values[t.value_index];
      PlanToken pk;
      pk.value = t.value;
      pk.tag = t.controllability;
      if (t.controllability == Controllability::uncontrollable) {
        pk.duration = Bound(val.dmin, val.dmax);
        TimeValue lo = TimeValue::of(sat_add(prev_end.lb.v, val.dmin.v));
        TimeValue hi = prev_end.ub.infinite() || val.dmax.infinite()
                           ? TimeValue::inf()
                           : TimeValue::of(sat_add(prev_end.ub.v, val.dmax.v));
        pk.end = Bound(lo, hi);
      } else {
        pk.end = net_.bounds(t.end_point);
        auto d = net_.distance(t.start_point, t.end_point);
        pk.duration = Bound(d.lo, d.hi);
      }
      prev_end = pk.end;
      pt.tokens.push_back(std::move(pk));
    }
    plan.timelines.push_back(std::move(pt));
  }

  for (const auto& rel : relations_) {
    PlanRelation pr;
    pr.left = names.at(rel.left);
    pr.right = rel.right ? names.at(*rel.right) : pr.left;
    pr.relation = rel.relation;
    plan.relations.push_back(std::move(pr));
  }
  plan.pseudo_controllable = squeezed_tokens().empty();
  return plan;
}

std::vector<std::size_t> PlanDatabase::squeezed_tokens() {
  ensure_propagated();
  if (!net_.consistent()) throw std::runtime_error("cannot probe an inconsistent network");
  std::vector<std::size_t> out;
  for (const auto& t : tokens_) {
    if (!t.link) continue;
    if (variable(t.variable).external) continue;
    if (net_.squeezed(*t.link)) out.push_back(t.id);
  }
  return out;
}

ticks_t PlanDatabase::makespan() {
  ensure_propagated();
  if (!net_.consistent()) throw std::runtime_error("cannot measure an inconsistent network");
  ticks_t m = 0;
  for (const auto& tl : timelines_) {
    if (tl.external) continue;
    for (std::size_t tid : tl.tokens) {
      const Token& t = tokens_[tid];
      if (t.origin == TokenOrigin::gap_fill) continue;
      m = std::max(m, net_.bounds(t.end_point).lb.v);
    }
  }
  return m;
}

}  // namespace tbp
