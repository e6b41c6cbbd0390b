#include "tbp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "tbp/relations.hpp"

namespace tbp {

// ---------------------------------------------------------------------------
// Dependency graph
// ---------------------------------------------------------------------------

std::size_t DependencyGraph::index_of(const std::string& variable) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == variable) return i;
  return nodes.size();
}

bool DependencyGraph::has_edge(const std::string& from, const std::string& to) const {
  std::size_t f = index_of(from), t = index_of(to);
  for (const auto& e : edges)
    if (e.first == f && e.second == t) return true;
  return false;
}

DependencyGraph build_dependency_graph(const PlanningDomain& domain) {
  DependencyGraph g;
  for (const auto& sv : domain.variables) g.nodes.push_back(sv.name);

  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(g.nodes.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (const auto& e : g.edges)
        if (e.first == u && !seen[e.second]) {
          seen[e.second] = true;
          stack.push_back(e.second);
        }
    }
    return false;
  };

  for (const auto& rule : domain.rules) {
    for (const auto& ex : rule.disjuncts) {
      auto comp = [&](std::size_t operand) -> const std::string& {
        return operand == 0 ? rule.trigger_variable : ex.vars.at(operand - 1).variable;
      };
      for (const auto& atom : ex.atoms) {
        const std::string& lc = comp(atom.left);
        const std::string& rc = rel_is_point(atom.relation.kind) ? lc : comp(atom.right);
        if (lc == rc) continue;
        // A constraint touching the trigger orients away from it; between two
        // bound tokens the reference side leads.
        const std::string& from = (atom.left == 0 || atom.right == 0) ? rule.trigger_variable : lc;
        const std::string& to = (from == lc) ? rc : lc;
        std::size_t fi = g.index_of(from), ti = g.index_of(to);
        if (fi >= g.nodes.size() || ti >= g.nodes.size()) continue;
        if (g.has_edge(from, to)) continue;
        if (reaches(ti, fi)) continue;
        g.edges.emplace_back(fi, ti);
      }
    }
  }
  return g;
}

std::map<std::string, std::size_t> hierarchy_levels(const DependencyGraph& g) {
  std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : g.edges) adj[e.first].push_back(e.second);

  std::vector<int> height(n, -1);
  auto dfs = [&](auto&& self, std::size_t u) -> int {
    if (height[u] >= 0) return height[u];
    int h = 0;
    for (std::size_t v : adj[u]) h = std::max(h, 1 + self(self, v));
    height[u] = h;
    return h;
  };

  int hmax = 0;
  for (std::size_t u = 0; u < n; ++u) hmax = std::max(hmax, dfs(dfs, u));
  std::map<std::string, std::size_t> out;
  for (std::size_t u = 0; u < n; ++u)
    out[g.nodes[u]] = static_cast<std::size_t>(hmax - height[u]);
  return out;
}

// ---------------------------------------------------------------------------
// Flaw filters
// ---------------------------------------------------------------------------

namespace {

int kind_precedence(Flaw::Kind k) {
  switch (k) {
    case Flaw::Kind::behavior_violation: return 0;
    case Flaw::Kind::unchecked_observation: return 1;
    case Flaw::Kind::open_goal: return 2;
    case Flaw::Kind::scheduling_threat: return 3;
    case Flaw::Kind::gap: return 4;
  }
  return 5;
}

const char* kind_name(Flaw::Kind k) {
  switch (k) {
    case Flaw::Kind::behavior_violation: return "behavior_violation";
    case Flaw::Kind::unchecked_observation: return "unchecked_observation";
    case Flaw::Kind::open_goal: return "open_goal";
    case Flaw::Kind::scheduling_threat: return "scheduling_threat";
    case Flaw::Kind::gap: return "gap";
  }
  return "flaw";
}

template <typename Score>
void keep_minimal(std::vector<Flaw>& flaws, Score score) {
  auto best = score(flaws.front());
  for (std::size_t i = 1; i < flaws.size(); ++i) best = std::min(best, score(flaws[i]));
  std::erase_if(flaws, [&](const Flaw& f) { return score(f) != best; });
}

}  // namespace

std::vector<Flaw> filter_flaws(PlanDatabase& db, std::vector<Flaw> flaws,
                               const std::vector<FlawFilterKind>& pipeline,
                               const std::map<std::string, std::size_t>& levels) {
  for (FlawFilterKind stage : pipeline) {
    if (flaws.size() <= 1) break;
    switch (stage) {
      case FlawFilterKind::type:
        keep_minimal(flaws, [](const Flaw& f) { return kind_precedence(f.kind); });
        break;
      case FlawFilterKind::hierarchy:
        keep_minimal(flaws, [&](const Flaw& f) -> std::size_t {
          if (f.variable.empty()) return 0;
          auto it = levels.find(f.variable);
          return it == levels.end() ? 0 : it->second;
        });
        break;
      case FlawFilterKind::fail_first: {
        // Scoring mutates the database (trial refinements), so cache per flaw.
        std::vector<std::size_t> counts(flaws.size());
        for (std::size_t i = 0; i < flaws.size(); ++i) counts[i] = db.refinements(flaws[i]).size();
        std::size_t best = *std::min_element(counts.begin(), counts.end());
        std::vector<Flaw> kept;
        for (std::size_t i = 0; i < flaws.size(); ++i)
          if (counts[i] == best) kept.push_back(std::move(flaws[i]));
        flaws = std::move(kept);
        break;
      }
    }
  }
  return flaws;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

namespace {

struct SearchNode {
  std::shared_ptr<SearchNode> parent;
  RefinementNode step;  // applied on top of the parent's state; unused at the root
  std::size_t id = 0;
  std::size_t depth = 0;
  ticks_t makespan = 0;
  bool revived = false;
};

using NodePtr = std::shared_ptr<SearchNode>;

// Moves the database from the state of `cur` to the state of `target` by
// retracting to their common ancestor and replaying the remaining steps.
void navigate(PlanDatabase& db, NodePtr& cur, const NodePtr& target) {
  std::vector<const SearchNode*> suffix;
  const SearchNode* a = cur.get();
  const SearchNode* b = target.get();
  while (b->depth > a->depth) {
    suffix.push_back(b);
    b = b->parent.get();
  }
  while (a->depth > b->depth) {
    db.retract();
    a = a->parent.get();
  }
  while (a != b) {
    db.retract();
    a = a->parent.get();
    suffix.push_back(b);
    b = b->parent.get();
  }
  for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) db.apply((*it)->step);
  cur = target;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

void trace_line(std::ostream& os, std::size_t expansion, const SearchNode& n, ticks_t makespan,
                const Flaw& chosen) {
  os << "{\"expansion\":" << expansion << ",\"node\":" << n.id << ",\"depth\":" << n.depth
     << ",\"makespan\":" << makespan << ",\"flaw\":\"" << json_escape(to_string(chosen))
     << "\",\"kind\":\"" << kind_name(chosen.kind) << "\"}\n";
}

SolveResult run(const PlanningProblem& problem, const SolverConfig& cfg, bool pc) {
  SolveResult res;
  if (!problem.domain) throw std::invalid_argument("problem has no domain");

  // A goal asking for a value its variable can never take is a planning
  // failure, not a modelling error.
  for (const auto& a : problem.goal.accomplishments) {
    const StateVariable* sv = problem.domain->find_variable(a.variable);
    if (sv && !sv->external && !sv->value_index(a.value)) return res;
  }

  PlanDatabase db = PlanDatabase::init(problem, cfg.db);
  auto levels = hierarchy_levels(build_dependency_graph(*problem.domain));

  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    if (cfg.budget_secs <= 0) return false;
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
    return elapsed.count() > cfg.budget_secs;
  };

  // `worse(a, b)` orders the heaps; the node popped first is the best.
  auto worse = [&cfg](const NodePtr& a, const NodePtr& b) {
    if (cfg.strategy == StrategyKind::makespan && a->makespan != b->makespan)
      return a->makespan > b->makespan;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id < b->id;
  };

  std::vector<NodePtr> fringe, parked;
  auto push = [&](std::vector<NodePtr>& heap, NodePtr n) {
    heap.push_back(std::move(n));
    std::push_heap(heap.begin(), heap.end(), worse);
  };
  auto pop = [&](std::vector<NodePtr>& heap) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    NodePtr n = std::move(heap.back());
    heap.pop_back();
    return n;
  };

  std::size_t next_id = 0;
  auto root = std::make_shared<SearchNode>();
  root->id = next_id++;
  root->makespan = db.makespan();
  push(fringe, root);
  NodePtr cur = root;

  while (true) {
    NodePtr node;
    if (!fringe.empty()) {
      node = pop(fringe);
    } else if (pc && !parked.empty()) {
      node = pop(parked);
    } else {
      return res;
    }

    navigate(db, cur, node);
    ++res.stats.expansions;
    if (res.stats.expansions > cfg.budget_nodes || out_of_time()) {
      res.status = SolveStatus::budget_exhausted;
      return res;
    }

    if (pc && !node->revived && !db.squeezed_tokens().empty()) {
      // Park the squeezed state; it is only expanded once the clean fringe
      // is exhausted, and then unconditionally.
      node->revived = true;
      push(parked, std::move(node));
      continue;
    }

    auto flaws = db.detect_flaws();
    if (flaws.empty()) {
      if (db.is_solution()) {
        res.status = SolveStatus::solution;
        res.plan = db.to_plan();
        res.pseudo_controllable = db.pseudo_controllable();
        return res;
      }
      continue;
    }

    auto filtered = filter_flaws(db, flaws, cfg.pipeline, levels);
    const Flaw& chosen = filtered.front();
    if (cfg.trace) trace_line(*cfg.trace, res.stats.expansions, *node, db.makespan(), chosen);

    auto refs = db.refinements(chosen);
    if (refs.empty()) continue;  // stays unsolvable in every descendant

    for (auto& r : refs) {
      auto child = std::make_shared<SearchNode>();
      child->parent = node;
      child->step = std::move(r);
      child->id = next_id++;
      child->depth = node->depth + 1;
      if (cfg.strategy == StrategyKind::makespan) {
        db.apply(child->step);
        child->makespan = db.makespan();
        db.retract();
      }
      push(fringe, std::move(child));
      ++res.stats.generated;
    }
  }
}

}  // namespace

SolveResult solve(const PlanningProblem& problem, const SolverConfig& cfg) {
  return run(problem, cfg, false);
}

SolveResult solve_pc(const PlanningProblem& problem, const SolverConfig& cfg) {
  return run(problem, cfg, true);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solution: return "solution";
    case SolveStatus::no_solution: return "no solution";
    case SolveStatus::budget_exhausted: return "budget exhausted";
  }
  return "unknown";
}

}  // namespace tbp
