#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mission_fixtures.hpp"
#include "tbp/parser.hpp"
#include "tbp/plan_db.hpp"
#include "tbp/validator.hpp"

using namespace tbp;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(TBP_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PlanningProblem rover_problem(std::shared_ptr<const PlanningDomain>* domain_out = nullptr) {
  DdlParseResult dres = parse_ddl(slurp("rover.ddl"), "rover.ddl");
  REQUIRE(dres.ok());
  auto domain = std::make_shared<const PlanningDomain>(*dres.domain);
  PdlParseResult pres = parse_pdl(slurp("rover_1task.pdl"), domain, "rover_1task.pdl");
  REQUIRE(pres.ok());
  if (domain_out) *domain_out = domain;
  return *pres.problem;
}

std::size_t count_kind(const std::vector<Flaw>& flaws, Flaw::Kind k) {
  std::size_t n = 0;
  for (const auto& f : flaws)
    if (f.kind == k) ++n;
  return n;
}

const Flaw* find_flaw(const std::vector<Flaw>& flaws, Flaw::Kind k, const std::string& var = "") {
  for (const auto& f : flaws)
    if (f.kind == k && (var.empty() || f.variable == var)) return &f;
  return nullptr;
}

// A single-variable domain around the instrument lifecycle, for gap and
// horizon-closure tests.
PlanningDomain bench_domain() {
  PlanningDomain d;
  d.name = "bench";
  d.horizon = TimeValue::of(200);
  d.variables = {mission::var_inst()};
  return d;
}

PlanningProblem bench_problem(std::vector<TokenSpec> facts, Goal goal = {}) {
  PlanningProblem p;
  p.name = "bench";
  p.domain = std::make_shared<PlanningDomain>(bench_domain());
  p.horizon = TimeValue::of(200);
  p.facts = std::move(facts);
  p.goal = std::move(goal);
  return p;
}

TokenSpec stowed_fact() { return {"inst", "Stowed", Bound(0, 0), Bound(10, 20), Bound(10, 20)}; }

}  // namespace

TEST_CASE("initialising from the mission problem stages tokens, goals and flaws") {
  auto db = PlanDatabase::init(mission::mission_problem());

  CHECK(db.consistent());
  CHECK(db.depth() == 0);
  CHECK(db.token_count() == 3);
  CHECK(db.pending_goal_count() == 2);

  const Timeline* win = db.timeline("win");
  REQUIRE(win);
  CHECK(win->external);
  CHECK(win->tokens.size() == 3);
  for (std::size_t tid : win->tokens) CHECK(db.token(tid).origin == TokenOrigin::observation);

  auto flaws = db.detect_flaws();
  CHECK(count_kind(flaws, Flaw::Kind::open_goal) == 2);
  CHECK(count_kind(flaws, Flaw::Kind::unchecked_observation) == 1);
  CHECK(count_kind(flaws, Flaw::Kind::gap) == 4);  // r, inst, nav, cm all need closing
  CHECK(count_kind(flaws, Flaw::Kind::scheduling_threat) == 0);
  for (const auto& f : flaws)
    if (f.kind == Flaw::Kind::gap) CHECK(f.tail);

  SUBCASE("the observation timeline verifies with a single node") {
    const Flaw* obs = find_flaw(flaws, Flaw::Kind::unchecked_observation, "win");
    REQUIRE(obs);
    auto nodes = db.refinements(*obs);
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].kind == RefinementNode::Kind::verify);
    db.apply(nodes[0]);
    CHECK(count_kind(db.detect_flaws(), Flaw::Kind::unchecked_observation) == 0);
    db.retract();
    CHECK(count_kind(db.detect_flaws(), Flaw::Kind::unchecked_observation) == 1);
  }

  SUBCASE("observation relations enter the committed set at construction") {
    auto p = mission::mission_problem();
    p.obs_relations = {{{"win", 0},
                        {"win", 2},
                        Relation(RelKind::before, {unbounded_above(0)})}};
    auto db2 = PlanDatabase::init(p);
    CHECK(db2.relations().size() == 1);
    CHECK(db2.relations()[0].relation.kind == RelKind::before);
  }
}

TEST_CASE("initialising from the rover problem") {
  std::shared_ptr<const PlanningDomain> domain;
  auto problem = rover_problem(&domain);
  auto db = PlanDatabase::init(problem);

  CHECK(db.token_count() == 6);
  std::size_t facts = 0, observations = 0;
  for (std::size_t i = 0; i < db.token_count(); ++i) {
    if (db.token(i).origin == TokenOrigin::fact) ++facts;
    if (db.token(i).origin == TokenOrigin::observation) ++observations;
  }
  CHECK(facts == 3);
  CHECK(observations == 3);
  CHECK(db.pending_goal_count() == 1);

  auto flaws = db.detect_flaws();
  CHECK(count_kind(flaws, Flaw::Kind::open_goal) == 1);
  CHECK(count_kind(flaws, Flaw::Kind::unchecked_observation) == 1);
  CHECK(find_flaw(flaws, Flaw::Kind::unchecked_observation, "Channel"));
  CHECK(count_kind(flaws, Flaw::Kind::gap) == 4);

  SUBCASE("the sampling goal expands once per site") {
    const Flaw* goal = find_flaw(flaws, Flaw::Kind::open_goal);
    REQUIRE(goal);
    auto nodes = db.refinements(*goal);
    REQUIRE(nodes.size() == 5);
    for (std::size_t d = 0; d < nodes.size(); ++d) {
      CHECK(nodes[d].kind == RefinementNode::Kind::expand);
      CHECK(nodes[d].disjunct == d);
    }

    PlanDatabase before = db;
    db.apply(nodes[0]);
    CHECK(db.token_count() == 7);
    CHECK(db.token(6).variable == "RoverController");
    CHECK(db.token(6).origin == TokenOrigin::goal_expansion);
    // The task goal closes and its three conditions open.
    CHECK(db.pending_goal_count() == 3);
    // The goal's own window atoms bind immediately.
    CHECK(db.relations().size() == 3);

    db.retract();
    CHECK(db == before);
    CHECK(db.pending_goal_count() == 1);
  }
}

TEST_CASE("a problem without goals reports no open goals") {
  auto p = mission::mission_problem();
  p.goal = {};
  auto db = PlanDatabase::init(p);
  CHECK(db.pending_goal_count() == 0);
  CHECK(count_kind(db.detect_flaws(), Flaw::Kind::open_goal) == 0);
}

TEST_CASE("temporally impossible facts are rejected at construction") {
  auto p = mission::mission_problem();
  p.facts.push_back({"r", "Idle", Bound(0, 0), Bound(3, 3), Bound(10, 20)});
  CHECK_THROWS_AS(PlanDatabase::init(p), std::runtime_error);
}

TEST_CASE("conditions on external variables resolve only by unification") {
  auto db = PlanDatabase::init(mission::mission_problem());
  auto flaws = db.detect_flaws();
  const Flaw* send = nullptr;
  for (const auto& f : flaws)
    if (f.kind == Flaw::Kind::open_goal && db.goal(f.goal).value == "SendData") send = &f;
  REQUIRE(send);

  auto nodes = db.refinements(*send);
  REQUIRE(nodes.size() == 2);  // no SendData token exists, one node per disjunct
  CHECK(nodes[0].kind == RefinementNode::Kind::expand);

  db.apply(nodes[0]);
  // SendData closed; the window and holding-position conditions opened.
  CHECK(db.pending_goal_count() == 3);
  std::size_t win_goal = k_no_slot;
  for (std::size_t id : db.open_goals())
    if (db.goal(id).variable == "win") win_goal = id;
  REQUIRE(win_goal != k_no_slot);
  CHECK(db.goal(win_goal).value == "Available");

  Flaw wf;
  wf.kind = Flaw::Kind::open_goal;
  wf.variable = "win";
  wf.goal = win_goal;
  auto wnodes = db.refinements(wf);
  REQUIRE(wnodes.size() == 1);
  CHECK(wnodes[0].kind == RefinementNode::Kind::unify);
  CHECK(db.token(wnodes[0].token).value == "Available");

  std::size_t rels_before = db.relations().size();
  db.apply(wnodes[0]);
  CHECK(db.pending_goal_count() == 2);
  // Binding the window posts the containment atom into the committed set.
  CHECK(db.relations().size() == rels_before + 1);
}

TEST_CASE("two tasks on one controller raise a scheduling threat") {
  auto p = mission::mission_problem();
  p.goal.accomplishments = {{"g1", "r", "TakeSample"}, {"g2", "r", "TakeSample"}};
  p.goal.relational = {};
  auto db = PlanDatabase::init(p);

  for (int round = 0; round < 2; ++round) {
    auto flaws = db.detect_flaws();
    const Flaw* goal = nullptr;
    for (const auto& f : flaws)
      if (f.kind == Flaw::Kind::open_goal && db.goal(f.goal).variable == "r" &&
          !db.goal(f.goal).token) {
        goal = &f;
        break;
      }
    REQUIRE(goal);
    auto nodes = db.refinements(*goal);
    REQUIRE(!nodes.empty());
    const RefinementNode* expand = nullptr;
    for (const auto& n : nodes)
      if (n.kind == RefinementNode::Kind::expand) expand = &n;
    REQUIRE(expand);
    db.apply(*expand);
  }

  auto flaws = db.detect_flaws();
  REQUIRE(count_kind(flaws, Flaw::Kind::scheduling_threat) == 1);
  const Flaw* threat = find_flaw(flaws, Flaw::Kind::scheduling_threat, "r");
  REQUIRE(threat);
  REQUIRE(threat->tokens.size() == 2);
  const std::vector<std::size_t> pair = threat->tokens;

  auto orders = db.refinements(*threat);
  REQUIRE(orders.size() == 2);
  CHECK(orders[0].kind == RefinementNode::Kind::order);
  db.apply(orders[0]);

  flaws = db.detect_flaws();
  CHECK(count_kind(flaws, Flaw::Kind::scheduling_threat) == 0);
  // Ordering exposes a head gap (the first task floats above zero) and the
  // value gap between the two samples; the head gap sorts first.
  const Flaw* head = find_flaw(flaws, Flaw::Kind::gap, "r");
  REQUIRE(head);
  CHECK_FALSE(head->tail);
  CHECK(head->tokens == std::vector<std::size_t>{pair[0]});
  const Flaw* gap = nullptr;
  for (const auto& f : flaws)
    if (f.kind == Flaw::Kind::gap && f.tokens == pair) gap = &f;
  REQUIRE(gap);
  CHECK_FALSE(gap->tail);

  auto fills = db.refinements(*gap);
  REQUIRE(fills.size() == 1);
  CHECK(fills[0].kind == RefinementNode::Kind::fill);
  CHECK(fills[0].values == std::vector<std::size_t>{0});  // an Idle stretch between samples
}

TEST_CASE("gaps are bridged along shortest transition paths") {
  Goal g;
  g.accomplishments = {{"g1", "inst", "Placed"}};
  auto db = PlanDatabase::init(bench_problem({stowed_fact()}, g));

  auto flaws = db.detect_flaws();
  const Flaw* goal = find_flaw(flaws, Flaw::Kind::open_goal);
  REQUIRE(goal);
  auto nodes = db.refinements(*goal);
  REQUIRE(nodes.size() == 1);  // no rules, no matching token: one plain expansion
  CHECK(nodes[0].rule == k_no_slot);
  db.apply(nodes[0]);

  flaws = db.detect_flaws();
  const Flaw* threat = find_flaw(flaws, Flaw::Kind::scheduling_threat);
  REQUIRE(threat);
  auto orders = db.refinements(*threat);
  // The fact is pinned at zero, so only one ordering survives the trial.
  REQUIRE(orders.size() == 1);
  CHECK(orders[0].left == 0);
  db.apply(orders[0]);

  flaws = db.detect_flaws();
  const Flaw* gap = find_flaw(flaws, Flaw::Kind::gap);
  REQUIRE(gap);
  REQUIRE_FALSE(gap->tail);
  auto fills = db.refinements(*gap);
  REQUIRE(fills.size() == 1);
  CHECK(fills[0].values == std::vector<std::size_t>{3, 1, 4});  // Unstowing, Unstowed, Placing

  db.apply(fills[0]);
  CHECK(db.token_count() == 5);
  for (std::size_t id = 2; id < 5; ++id) CHECK(db.token(id).origin == TokenOrigin::gap_fill);
  flaws = db.detect_flaws();
  REQUIRE(flaws.size() == 1);
  CHECK(flaws[0].kind == Flaw::Kind::gap);
  CHECK(flaws[0].tail);
}

TEST_CASE("a gap over a direct transition closes without inserting tokens") {
  Goal g;
  g.accomplishments = {{"g1", "inst", "Unstowing"}};
  auto db = PlanDatabase::init(bench_problem({stowed_fact()}, g));

  auto flaws = db.detect_flaws();
  db.apply(db.refinements(*find_flaw(flaws, Flaw::Kind::open_goal)).at(0));
  flaws = db.detect_flaws();
  db.apply(db.refinements(*find_flaw(flaws, Flaw::Kind::scheduling_threat)).at(0));

  flaws = db.detect_flaws();
  const Flaw* gap = find_flaw(flaws, Flaw::Kind::gap);
  REQUIRE(gap);
  REQUIRE_FALSE(gap->tail);
  auto fills = db.refinements(*gap);
  REQUIRE(fills.size() == 1);
  CHECK(fills[0].values.empty());

  std::size_t before = db.token_count();
  db.apply(fills[0]);
  CHECK(db.token_count() == before);
  CHECK(count_kind(db.detect_flaws(), Flaw::Kind::gap) == 1);  // only the horizon remains open
}

TEST_CASE("a cycle back to the same value threads the full loop") {
  Goal g;
  g.accomplishments = {{"g1", "inst", "Stowed"}};
  auto db = PlanDatabase::init(bench_problem({stowed_fact()}, g));

  auto flaws = db.detect_flaws();
  auto nodes = db.refinements(*find_flaw(flaws, Flaw::Kind::open_goal));
  // The fact already holds the requested value, so unification is offered too.
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].kind == RefinementNode::Kind::unify);
  REQUIRE(nodes[1].kind == RefinementNode::Kind::expand);
  db.apply(nodes[1]);
  flaws = db.detect_flaws();
  db.apply(db.refinements(*find_flaw(flaws, Flaw::Kind::scheduling_threat)).at(0));

  flaws = db.detect_flaws();
  const Flaw* gap = find_flaw(flaws, Flaw::Kind::gap);
  REQUIRE(gap);
  auto fills = db.refinements(*gap);
  REQUIRE(fills.size() == 1);
  CHECK(fills[0].values == std::vector<std::size_t>{3, 1, 2});  // Unstowing, Unstowed, Stowing
  db.apply(fills[0]);
  CHECK(db.token_count() == 5);
}

TEST_CASE("tail gaps close by pinning or appending") {
  auto db = PlanDatabase::init(bench_problem({stowed_fact()}));

  // [10,20] cannot reach the 200-tick horizon, so pinning is not offered.
  auto flaws = db.detect_flaws();
  REQUIRE(flaws.size() == 1);
  REQUIRE(flaws[0].tail);
  auto nodes = db.refinements(flaws[0]);
  REQUIRE(nodes.size() == 1);
  CHECK_FALSE(nodes[0].pin);
  CHECK(nodes[0].values == std::vector<std::size_t>{3});
  db.apply(nodes[0]);

  flaws = db.detect_flaws();
  REQUIRE(flaws.size() == 1);
  nodes = db.refinements(flaws[0]);
  REQUIRE(nodes.size() == 1);  // Unstowing only transitions to Unstowed
  db.apply(nodes[0]);

  // Unstowed is open-ended: pin the horizon, or keep extending.
  flaws = db.detect_flaws();
  REQUIRE(flaws.size() == 1);
  nodes = db.refinements(flaws[0]);
  REQUIRE(nodes.size() == 3);
  CHECK(nodes[0].pin);
  CHECK(nodes[1].values == std::vector<std::size_t>{2});
  CHECK(nodes[2].values == std::vector<std::size_t>{4});

  db.apply(nodes[0]);
  CHECK(db.detect_flaws().empty());
  CHECK(db.is_solution());
  CHECK(db.end_bounds(db.timeline("inst")->tokens.back()) == Bound(200, 200));
}

TEST_CASE("an empty planned timeline opens with any first value") {
  auto db = PlanDatabase::init(bench_problem({}));
  auto flaws = db.detect_flaws();
  REQUIRE(flaws.size() == 1);
  REQUIRE(flaws[0].tail);
  CHECK(flaws[0].tokens.empty());

  auto nodes = db.refinements(flaws[0]);
  REQUIRE(nodes.size() == 7);
  db.apply(nodes[0]);
  REQUIRE(db.token_count() == 1);
  CHECK(db.token(0).value == "Stowed");
  CHECK(db.token(0).origin == TokenOrigin::gap_fill);
  CHECK(db.start_bounds(0) == Bound(0, 0));
}

TEST_CASE("head gaps anchor at zero or grow backwards") {
  Goal g;
  g.accomplishments = {{"g1", "inst", "Unstowed"}};
  auto db = PlanDatabase::init(bench_problem({}, g));

  auto flaws = db.detect_flaws();
  db.apply(db.refinements(*find_flaw(flaws, Flaw::Kind::open_goal)).at(0));

  flaws = db.detect_flaws();
  const Flaw* head = find_flaw(flaws, Flaw::Kind::gap);
  REQUIRE(head);
  REQUIRE_FALSE(head->tail);
  REQUIRE(head->tokens == std::vector<std::size_t>{0});

  auto nodes = db.refinements(*head);
  REQUIRE(nodes.size() == 4);
  CHECK(nodes[0].pin);
  CHECK(nodes[1].values == std::vector<std::size_t>{3});  // Unstowing
  CHECK(nodes[2].values == std::vector<std::size_t>{5});  // Placed
  CHECK(nodes[3].values == std::vector<std::size_t>{6});  // Sampling

  SUBCASE("anchoring pins the start") {
    db.apply(nodes[0]);
    CHECK(db.start_bounds(0) == Bound(0, 0));
    auto after = db.detect_flaws();
    REQUIRE(after.size() == 1);
    CHECK(after[0].tail);
  }

  SUBCASE("prepending shifts the gap onto the new front") {
    db.apply(nodes[1]);
    REQUIRE(db.token_count() == 2);
    CHECK(db.token(1).value == "Unstowing");
    CHECK(db.token(1).origin == TokenOrigin::gap_fill);
    auto after = db.detect_flaws();
    const Flaw* again = find_flaw(after, Flaw::Kind::gap);
    REQUIRE(again);
    CHECK_FALSE(again->tail);
    CHECK(again->tokens == std::vector<std::size_t>{1});
  }
}

TEST_CASE("split goals choose a disjunct through the root entry") {
  auto p = mission::mission_problem();
  p.goal = mission::split_goal();
  auto db = PlanDatabase::init(p);
  CHECK(db.pending_goal_count() == 4);  // three accomplishments plus the choice itself

  auto flaws = db.detect_flaws();
  const Flaw* root = nullptr;
  for (const auto& f : flaws)
    if (f.kind == Flaw::Kind::open_goal && db.goal(f.goal).variable.empty()) root = &f;
  REQUIRE(root);

  auto nodes = db.refinements(*root);
  REQUIRE(nodes.size() == 2);
  PlanDatabase before = db;
  db.apply(nodes[1]);
  CHECK(db.pending_goal_count() == 3);
  db.retract();
  CHECK(db == before);
}

TEST_CASE("random refinement walks retract to byte-equal states") {
  auto db = PlanDatabase::init(mission::mission_problem());
  std::mt19937_64 rng(2026);

  std::size_t applied = 0, checked = 0;
  for (int iter = 0; iter < 40; ++iter) {
    auto flaws = db.detect_flaws();
    if (flaws.empty()) break;
    const Flaw& f = flaws[rng() % flaws.size()];
    auto nodes = db.refinements(f);
    if (nodes.empty()) continue;
    const RefinementNode node = nodes[rng() % nodes.size()];

    PlanDatabase before = db;
    db.apply(node);
    CHECK(db.consistent());
    db.retract();
    CHECK(db == before);
    ++checked;

    if (rng() % 2 == 0 && db.depth() < 24) {
      db.apply(node);
      ++applied;
    }
  }
  CHECK(checked > 10);
  CHECK(applied > 0);
}

TEST_CASE("journal misuse is rejected") {
  auto db = PlanDatabase::init(mission::mission_problem());
  CHECK_THROWS_AS(db.retract(), std::runtime_error);

  RefinementNode stale;
  stale.stamp = 99;
  CHECK_THROWS_AS(db.apply(stale), std::runtime_error);
}

TEST_CASE("a finished plan loads as a solution") {
  auto dom = std::make_shared<const PlanningDomain>(mission::domain());
  auto db = PlanDatabase::from_plan(dom, mission::mission_plan());

  CHECK(db.consistent());
  CHECK(db.detect_flaws().empty());
  CHECK(db.pending_goal_count() == 0);
  CHECK(db.is_solution());
  CHECK(db.makespan() == 200);

  // The written windows leave Moving only [19,33] of its declared [19,37]:
  // its start is pinned at 5 and the containing Stowed token ends by 38.
  auto squeezed = db.squeezed_tokens();
  REQUIRE(squeezed.size() == 1);
  CHECK(db.token(squeezed[0]).value == "Moving");
  CHECK_FALSE(db.pseudo_controllable());

  SUBCASE("the open mission is not a solution") {
    auto open = PlanDatabase::init(mission::mission_problem());
    CHECK_FALSE(open.is_solution());
  }

  SUBCASE("an uncontrollable final token disqualifies the timeline") {
    PlanningDomain md;
    md.name = "m";
    md.horizon = TimeValue::of(200);
    StateVariable sv;
    sv.name = "m";
    sv.values = {mission::val("A", 1, TimeValue::inf()),
                 mission::val("B", 5, TimeValue::of(8), Controllability::uncontrollable)};
    sv.transitions = {{1}, {0}};
    md.variables = {sv};

    FlexiblePlan fp;
    fp.domain = "m";
    fp.horizon = TimeValue::of(200);
    fp.timelines = {{"m",
                     {mission::tok("A", Bound(192, 195), Bound(192, 195)),
                      mission::tok("B", Bound(200, 200), Bound(5, 8),
                                   Controllability::uncontrollable)}}};
    auto mdb = PlanDatabase::from_plan(std::make_shared<PlanningDomain>(md), fp);
    auto flaws = mdb.detect_flaws();
    REQUIRE(flaws.size() == 1);
    CHECK(flaws[0].kind == Flaw::Kind::gap);
    CHECK(flaws[0].tail);
    // No repair fits: the horizon leaves no room to append after B, and an
    // uncontrollable end cannot be pinned.
    CHECK(mdb.refinements(flaws[0]).empty());
    CHECK_FALSE(mdb.is_solution());
  }
}

TEST_CASE("the instrument fragment schedules to its earliest instants") {
  auto dom = std::make_shared<const PlanningDomain>(mission::domain());
  FlexiblePlan frag;
  frag.domain = "mission";
  frag.horizon = TimeValue::of(200);
  frag.timelines = {mission::instrument_flex()};

  auto db = PlanDatabase::from_plan(dom, frag);
  Schedule s = db.extract_schedule();
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].tokens.size() == 3);
  CHECK(s[0].tokens[0].end == 20);
  CHECK(s[0].tokens[1].end == 23);
  CHECK(s[0].tokens[2].end == 50);
  CHECK(s[0].start_of(0) == 0);
  CHECK(s[0].start_of(1) == 20);
  CHECK(s[0].start_of(2) == 23);
  CHECK(check_is_schedule(s, frag, *dom));
  CHECK(db.extract_schedule() == s);
}

TEST_CASE("an inconsistent refinement blocks export until retracted") {
  auto dom = std::make_shared<const PlanningDomain>(mission::domain());
  auto db = PlanDatabase::from_plan(dom, mission::mission_plan());

  const Timeline* r = db.timeline("r");
  REQUIRE(r);
  RefinementNode swap;
  swap.kind = RefinementNode::Kind::order;
  swap.stamp = db.depth();
  swap.left = r->tokens[1];
  swap.right = r->tokens[0];
  db.apply(swap);
  CHECK_FALSE(db.consistent());
  CHECK_THROWS_AS(db.extract_schedule(), std::runtime_error);
  CHECK_THROWS_AS(db.to_plan(), std::runtime_error);

  db.retract();
  CHECK(db.consistent());
  CHECK(db.is_solution());
}

TEST_CASE("database state exports back to a valid plan") {
  auto dom = std::make_shared<const PlanningDomain>(mission::domain());
  auto db = PlanDatabase::from_plan(dom, mission::mission_plan());
  FlexiblePlan out = db.to_plan();

  CHECK(out.domain == "mission");
  CHECK(out.horizon == TimeValue::of(200));
  REQUIRE(out.timelines.size() == 5);
  CHECK(out.timelines[0].variable == "r");
  CHECK(out.timelines[4].variable == "win");

  // Observation windows come back exactly as stated.
  CHECK(out.timelines[4].tokens == mission::plan_win().tokens);
  // The committed set survives the round trip verbatim.
  CHECK(out.relations == mission::mission_plan().relations);
  // The exported flag agrees with the validator's reading of the same file.
  CHECK_FALSE(out.pseudo_controllable);
  CHECK(check_pseudo_controllability(out, *dom) == std::vector<TokenName>{{"nav", 1}});

  CHECK(validate_plan(out, *dom).empty());
  CHECK(check_plan_validity(out, *dom).pass);
  CHECK(check_instance(db.extract_schedule(), mission::mission_plan(), *dom));
  CHECK(check_instance(db.extract_schedule(), out, *dom));
  CHECK(PlanDatabase::from_plan(dom, out).is_solution());
}

TEST_CASE("a contained contingent duration is reported squeezed") {
  PlanningDomain sq;
  sq.name = "squeeze";
  sq.horizon = TimeValue::of(100);
  StateVariable w;
  w.name = "w";
  w.values = {mission::val("Off", 1, TimeValue::inf()),
              mission::val("Work", 5, TimeValue::of(10), Controllability::uncontrollable)};
  w.transitions = {{1}, {0}};
  StateVariable slot;
  slot.name = "s";
  slot.values = {mission::val("Idle", 1, TimeValue::inf()), mission::val("Slot", 6, TimeValue::of(6))};
  slot.transitions = {{1}, {0}};
  sq.variables = {w, slot};

  FlexiblePlan plan;
  plan.domain = "squeeze";
  plan.horizon = TimeValue::of(100);
  plan.timelines = {{"w",
                     {mission::tok("Off", Bound(4, 20), Bound(4, 20)),
                      mission::tok("Work", Bound(9, 30), Bound(5, 10),
                                   Controllability::uncontrollable)}},
                    {"s",
                     {mission::tok("Idle", Bound(5, 15), Bound(5, 15)),
                      mission::tok("Slot", Bound(11, 21), Bound(6, 6))}}};
  plan.relations = {mission::prel(
      "w.2", Relation(RelKind::during, {unbounded_above(0), unbounded_above(0)}), "s.2")};

  auto db = PlanDatabase::from_plan(std::make_shared<PlanningDomain>(sq), plan);
  REQUIRE(db.consistent());
  auto squeezed = db.squeezed_tokens();
  REQUIRE(squeezed.size() == 1);
  CHECK(db.token(squeezed[0]).value == "Work");
  CHECK_FALSE(db.pseudo_controllable());
  CHECK_FALSE(db.to_plan().pseudo_controllable);
}
