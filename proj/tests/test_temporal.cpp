#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "tbp/relations.hpp"
#include "tbp/stn.hpp"
#include "tbp/time.hpp"

using namespace tbp;

namespace {

// Reference all-pairs shortest path, kept deliberately naive and separate
// from the library implementation.
struct OracleNet {
  std::size_t n;
  std::vector<std::vector<ticks_t>> w;

  explicit OracleNet(std::size_t points) : n(points), w(points, std::vector<ticks_t>(points, k_inf)) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i][i] = 0;
      if (i != 0) w[i][0] = 0;  // every point at or after the origin
    }
  }

  void constrain(std::size_t a, std::size_t b, ticks_t lb, ticks_t ub) {
    w[a][b] = std::min(w[a][b], ub);
    w[b][a] = std::min(w[b][a], -lb);
  }

  // Returns false on a negative cycle.
  bool solve() {
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          ticks_t via = sat_add(w[i][k], w[k][j]);
          if (via < w[i][j]) w[i][j] = via;
        }
    for (std::size_t i = 0; i < n; ++i)
      if (w[i][i] < 0) return false;
    return true;
  }
};

Relation rel(RelKind k) { return Relation(k); }
Relation rel(RelKind k, Bound b) { return Relation(k, {b}); }
Relation rel(RelKind k, Bound b1, Bound b2) { return Relation(k, {b1, b2}); }
Relation rel_at(RelKind k, ticks_t t) { return Relation(k, {}, TimeValue::of(t)); }
Relation rel_at(RelKind k, Bound b, ticks_t t) { return Relation(k, {b}, TimeValue::of(t)); }

Interval iv(ticks_t s, ticks_t e) { return Interval{TimeValue::of(s), TimeValue::of(e)}; }

}  // namespace

TEST_CASE("breakfast network: two travellers sharing a road") {
  // Origin is 7:00; John leaves within [10,20], drives [30,40]; Fred drives
  // [40,50] and arrives within [60,70]; John arrives [10,20] after Fred left.
  TemporalNetwork net;
  auto jl = net.add_time_point();
  auto ja = net.add_time_point();
  auto fl = net.add_time_point();
  auto fa = net.add_time_point();

  net.add_requirement(TemporalNetwork::origin, jl, Bound(10, 20));
  net.add_requirement(jl, ja, Bound(30, 40));
  net.add_requirement(fl, fa, Bound(40, 50));
  net.add_requirement(TemporalNetwork::origin, fa, Bound(60, 70));
  net.add_requirement(fl, ja, Bound(10, 20));

  REQUIRE(net.propagate());
  // Frozen: Fred must have left between 7:20 and 7:30.
  CHECK(net.bounds(fl) == Bound(20, 30));
  CHECK(net.bounds(jl) == Bound(10, 20));
  CHECK(net.bounds(ja) == Bound(40, 50));
  CHECK(net.bounds(fa) == Bound(60, 70));

  OracleNet oracle(5);
  oracle.constrain(0, 1, 10, 20);
  oracle.constrain(1, 2, 30, 40);
  oracle.constrain(3, 4, 40, 50);
  oracle.constrain(0, 4, 60, 70);
  oracle.constrain(3, 2, 10, 20);
  REQUIRE(oracle.solve());
  for (std::size_t p = 0; p < 5; ++p) {
    Bound b = net.bounds(static_cast<TemporalNetwork::point_id>(p));
    CHECK(b.lb.v == -oracle.w[p][0]);
    CHECK(b.ub.v == oracle.w[0][p]);
  }
}

TEST_CASE("self loop with positive lower bound is inconsistent") {
  TemporalNetwork net;
  auto x = net.add_time_point();
  net.add_requirement(x, x, Bound(1, 1));
  CHECK_FALSE(net.propagate());
  CHECK_THROWS_AS(net.bounds(x), std::logic_error);
}

TEST_CASE("propagate is idempotent and bounds are stable") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  auto b = net.add_time_point();
  net.add_requirement(TemporalNetwork::origin, a, Bound(2, 9));
  net.add_requirement(a, b, Bound(1, 4));
  REQUIRE(net.propagate());
  Bound ba = net.bounds(a);
  Bound bb = net.bounds(b);
  REQUIRE(net.propagate());
  CHECK(net.bounds(a) == ba);
  CHECK(net.bounds(b) == bb);
}

TEST_CASE("stale and unknown-id queries throw") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  CHECK_THROWS_AS(net.bounds(a), std::logic_error);
  REQUIRE(net.propagate());
  CHECK_THROWS_AS(net.bounds(99), std::invalid_argument);
  net.add_requirement(TemporalNetwork::origin, a, Bound(1, 2));
  CHECK_THROWS_AS(net.bounds(a), std::logic_error);  // stale again after a post
}

TEST_CASE("requirement bounds validation") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  CHECK_THROWS_AS(Bound(5, 3), std::invalid_argument);
  CHECK_THROWS_AS(net.add_requirement(a, 7, Bound(0, 1)), std::invalid_argument);
}

TEST_CASE("contingent links: declaration rules and squeeze detection") {
  TemporalNetwork net;
  auto s = net.add_time_point();
  auto e = net.add_time_point();
  CHECK_THROWS_AS(net.mark_contingent(s, e, TimeValue::of(0), TimeValue::of(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.mark_contingent(s, e, TimeValue::of(2), TimeValue::inf()),
                  std::invalid_argument);
  CHECK_THROWS_AS(net.mark_contingent(s, e, TimeValue::of(6), TimeValue::of(5)),
                  std::invalid_argument);

  // A sampling task whose duration may run 7..18 ticks.
  auto li = net.mark_contingent(s, e, TimeValue::of(7), TimeValue::of(18));
  net.add_requirement(TemporalNetwork::origin, s, Bound(10, 10));
  REQUIRE(net.propagate());
  CHECK_FALSE(net.squeezed(li));  // implied duration is exactly [7,18]

  // Cap the end so only durations up to 17 remain feasible.
  auto cap = net.add_requirement(TemporalNetwork::origin, e, Bound(0, 27));
  REQUIRE(net.propagate());
  CHECK(net.squeezed(li));

  net.unpost(cap);
  REQUIRE(net.propagate());
  CHECK_FALSE(net.squeezed(li));
}

TEST_CASE("fixed-duration link is never squeezed by its own window") {
  TemporalNetwork net;
  auto s = net.add_time_point();
  auto e = net.add_time_point();
  auto li = net.mark_contingent(s, e, TimeValue::of(3), TimeValue::of(3));
  net.add_requirement(TemporalNetwork::origin, s, Bound(23, 28));
  REQUIRE(net.propagate());
  CHECK_FALSE(net.squeezed(li));
}

TEST_CASE("requirements only narrow bounds") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  auto b = net.add_time_point();
  net.add_requirement(TemporalNetwork::origin, a, Bound(0, 50));
  net.add_requirement(a, b, Bound(2, 20));
  REQUIRE(net.propagate());
  Bound before_a = net.bounds(a);
  Bound before_b = net.bounds(b);
  net.add_requirement(TemporalNetwork::origin, b, Bound(10, 30));
  REQUIRE(net.propagate());
  CHECK(net.bounds(a).lb >= before_a.lb);
  CHECK(net.bounds(a).ub <= before_a.ub);
  CHECK(net.bounds(b).lb >= before_b.lb);
  CHECK(net.bounds(b).ub <= before_b.ub);
}

TEST_CASE("randomized agreement with the reference solver") {
  std::mt19937_64 rng(1234);
  for (int round = 0; round < 200; ++round) {
    std::uniform_int_distribution<std::size_t> npts(2, 12);
    std::size_t n = npts(rng);
    TemporalNetwork net;
    OracleNet oracle(n);
    std::vector<TemporalNetwork::point_id> ids{TemporalNetwork::origin};
    for (std::size_t i = 1; i < n; ++i) ids.push_back(net.add_time_point());

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<ticks_t> lo(0, 40);
    std::uniform_int_distribution<ticks_t> span(0, 30);
    int m = 1 + static_cast<int>(rng() % (2 * n));
    for (int c = 0; c < m; ++c) {
      std::size_t a = pick(rng), b = pick(rng);
      ticks_t l = lo(rng);
      ticks_t u = l + span(rng);
      net.add_requirement(ids[a], ids[b], Bound(l, u));
      oracle.constrain(a, b, l, u);
    }
    bool expect = oracle.solve();
    bool got = net.propagate();
    REQUIRE(got == expect);
    if (expect) {
      for (std::size_t p = 0; p < n; ++p) {
        Bound b = net.bounds(ids[p]);
        CHECK(b.lb.v == -oracle.w[p][0]);
        CHECK((b.ub.infinite() ? k_inf : b.ub.v) == oracle.w[0][p]);
      }
    }
  }
}

TEST_CASE("incremental repair path matches from-scratch recomputation") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 50; ++round) {
    std::size_t n = 6 + rng() % 6;
    TemporalNetwork net;
    std::vector<TemporalNetwork::point_id> ids{TemporalNetwork::origin};
    for (std::size_t i = 1; i < n; ++i) ids.push_back(net.add_time_point());
    REQUIRE(net.propagate());  // valid baseline; later posts take the repair path

    OracleNet oracle(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<ticks_t> lo(0, 40);
    std::uniform_int_distribution<ticks_t> span(0, 30);
    bool alive = true;
    for (int batch = 0; batch < 6 && alive; ++batch) {
      std::size_t a = pick(rng), b = pick(rng);
      ticks_t l = lo(rng);
      ticks_t u = l + span(rng);
      net.add_requirement(ids[a], ids[b], Bound(l, u));
      oracle.constrain(a, b, l, u);
      OracleNet fresh = oracle;
      bool expect = fresh.solve();
      bool got = net.propagate();
      REQUIRE(got == expect);
      alive = expect;
      if (expect)
        for (std::size_t p = 0; p < n; ++p)
          CHECK(net.bounds(ids[p]).lb.v == -fresh.w[p][0]);
    }
  }
}

TEST_CASE("incremental repair on a network above the recompute threshold") {
  TemporalNetwork net;
  std::vector<TemporalNetwork::point_id> ids{TemporalNetwork::origin};
  for (int i = 1; i < 240; ++i) ids.push_back(net.add_time_point());
  for (int i = 0; i + 1 < 240; ++i)
    net.add_requirement(ids[i], ids[i + 1], Bound(1, 3));
  REQUIRE(net.propagate());
  CHECK(net.bounds(ids[239]) == Bound(239, 717));
  net.add_requirement(TemporalNetwork::origin, ids[239], Bound(0, 500));
  REQUIRE(net.propagate());
  CHECK(net.bounds(ids[239]) == Bound(239, 500));
  CHECK(net.bounds(ids[120]).ub.v == 3 * 120);  // forward chain beats the horizon cap
  net.add_requirement(TemporalNetwork::origin, ids[1], Bound(2, 2));
  REQUIRE(net.propagate());
  CHECK(net.bounds(ids[239]).lb.v == 2 + 238);
}

TEST_CASE("snapshot and unpost restore the previous state exactly") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  auto b = net.add_time_point();
  net.add_requirement(TemporalNetwork::origin, a, Bound(0, 40));
  net.add_requirement(a, b, Bound(5, 15));
  REQUIRE(net.propagate());
  Bound ba = net.bounds(a);
  Bound bb = net.bounds(b);
  auto snap = net.snapshot();

  auto receipt = net.add_requirement(TemporalNetwork::origin, b, Bound(30, 35));
  REQUIRE(net.propagate());
  CHECK(net.bounds(a) != ba);

  net.unpost(receipt);
  net.restore(std::move(snap));
  CHECK(net.bounds(a) == ba);
  CHECK(net.bounds(b) == bb);
}

TEST_CASE("shrink drops trailing points") {
  TemporalNetwork net;
  auto a = net.add_time_point();
  std::size_t before = net.point_count();
  auto x = net.add_time_point();
  auto y = net.add_time_point();
  auto r1 = net.add_requirement(x, y, Bound(1, 2));
  auto r2 = net.add_requirement(a, x, Bound(0, 3));
  net.unpost(r2);
  net.unpost(r1);
  net.shrink_points(before);
  CHECK(net.point_count() == before);
  REQUIRE(net.propagate());
  CHECK(net.bounds(a) == Bound(0, TimeValue::inf().v));
}

// ---------------------------------------------------------------------------
// Relation algebra
// ---------------------------------------------------------------------------

TEST_CASE("expansion table: derived relations rewrite to primitives") {
  Bound b1(2, 7), b2(1, 4);
  Bound zero(0, 0);
  Bound anyb = unbounded_above(0);

  auto x = expand_relation(rel(RelKind::meets));
  REQUIRE(x.size() == 1);
  CHECK(x[0] == PrimitiveAtom{RelKind::end_before_start, zero, false, std::nullopt});

  x = expand_relation(rel(RelKind::met_by));
  REQUIRE(x.size() == 1);
  CHECK(x[0] == PrimitiveAtom{RelKind::end_before_start, zero, true, std::nullopt});

  x = expand_relation(rel(RelKind::before, b1));
  REQUIRE(x.size() == 1);
  CHECK(x[0] == PrimitiveAtom{RelKind::end_before_start, b1, false, std::nullopt});

  x = expand_relation(rel(RelKind::after, b1));
  REQUIRE(x.size() == 1);
  CHECK(x[0] == PrimitiveAtom{RelKind::end_before_start, b1, true, std::nullopt});

  x = expand_relation(rel(RelKind::overlaps, b1, b2));
  REQUIRE(x.size() == 3);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, b1, false, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, b2, false, std::nullopt});
  CHECK(x[2] == PrimitiveAtom{RelKind::start_before_end, anyb, true, std::nullopt});

  x = expand_relation(rel(RelKind::equals));
  REQUIRE(x.size() == 2);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, zero, false, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, zero, false, std::nullopt});

  x = expand_relation(rel(RelKind::contains, b1, b2));
  REQUIRE(x.size() == 2);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, b1, false, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, b2, true, std::nullopt});

  x = expand_relation(rel(RelKind::during, b1, b2));
  REQUIRE(x.size() == 2);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, b1, true, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, b2, false, std::nullopt});

  x = expand_relation(rel(RelKind::starts, b1));
  REQUIRE(x.size() == 2);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, zero, false, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, b1, false, std::nullopt});

  x = expand_relation(rel(RelKind::finishes, b1));
  REQUIRE(x.size() == 2);
  CHECK(x[0] == PrimitiveAtom{RelKind::start_before_start, b1, false, std::nullopt});
  CHECK(x[1] == PrimitiveAtom{RelKind::end_before_end, zero, false, std::nullopt});

  x = expand_relation(rel_at(RelKind::starts_at, 42));
  REQUIRE(x.size() == 1);
  CHECK(x[0].kind == RelKind::starts_before);
  CHECK(x[0].bound == zero);
  CHECK(x[0].anchor == TimeValue::of(42));

  x = expand_relation(rel_at(RelKind::ends_at, 42));
  REQUIRE(x.size() == 1);
  CHECK(x[0].kind == RelKind::ends_before);
  CHECK(x[0].bound == zero);
  CHECK(x[0].anchor == TimeValue::of(42));
}

TEST_CASE("relation arity and anchor are validated") {
  CHECK_THROWS_AS(Relation(RelKind::before, {}), std::invalid_argument);
  CHECK_THROWS_AS(Relation(RelKind::meets, {Bound(0, 1)}), std::invalid_argument);
  CHECK_THROWS_AS(Relation(RelKind::starts_at, {}), std::invalid_argument);  // missing anchor
  CHECK_THROWS_AS(Relation(RelKind::equals, {}, TimeValue::of(3)), std::invalid_argument);
  CHECK_THROWS_AS(Relation(RelKind::during, {Bound(0, 1)}), std::invalid_argument);
}

TEST_CASE("holds: communication window fixtures") {
  // Available window [60,130] vs send task [100,123].
  Interval win = iv(60, 130);
  Interval cm = iv(100, 123);
  CHECK(holds(rel(RelKind::start_before_start, unbounded_above(5)), win, cm));  // gap of 40
  CHECK_FALSE(holds(rel(RelKind::start_before_start, Bound(5, 39)), win, cm));
  CHECK(holds(rel_at(RelKind::ends_before, Bound(30, 45), 165), cm));  // 165-123 = 42
  CHECK_FALSE(holds(rel_at(RelKind::ends_before, Bound(30, 41), 165), cm));
  CHECK(holds(rel_at(RelKind::ends_at, 123), cm));
  CHECK(holds(rel_at(RelKind::starts_at, 100), cm));

  // A window spanning [80,170] contains a transmission [110,130].
  CHECK(holds(rel(RelKind::contains, unbounded_above(0), unbounded_above(0)), iv(80, 170),
              iv(110, 130)));
  CHECK(holds(rel(RelKind::during, unbounded_above(0), unbounded_above(0)), iv(110, 130),
              iv(80, 170)));
  CHECK_FALSE(holds(rel(RelKind::contains, unbounded_above(0), unbounded_above(0)), iv(110, 130),
                    iv(80, 170)));

  CHECK(holds(rel(RelKind::meets), iv(10, 20), iv(20, 30)));
  CHECK_FALSE(holds(rel(RelKind::meets), iv(10, 20), iv(21, 30)));
  CHECK(holds(rel(RelKind::met_by), iv(21, 30), iv(10, 21)));
  CHECK(holds(rel(RelKind::equals), iv(4, 9), iv(4, 9)));
  CHECK(holds(rel(RelKind::starts, Bound(0, 5)), iv(4, 9), iv(4, 12)));
  CHECK(holds(rel(RelKind::finishes, Bound(1, 8)), iv(4, 12), iv(6, 12)));
  CHECK(holds(rel(RelKind::overlaps, Bound(1, 10), Bound(1, 10)), iv(0, 10), iv(5, 15)));
  CHECK_FALSE(holds(rel(RelKind::overlaps, Bound(1, 10), Bound(1, 10)), iv(0, 10), iv(12, 15)));
}

TEST_CASE("holds on a derived relation equals conjunction of its expansion") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<ticks_t> pt(0, 60);
  std::uniform_int_distribution<ticks_t> blo(0, 20);
  std::uniform_int_distribution<ticks_t> bspan(0, 25);
  std::uniform_int_distribution<int> kind_pick(0, 9);
  const RelKind kinds[] = {RelKind::meets,    RelKind::met_by,  RelKind::before,
                           RelKind::after,    RelKind::overlaps, RelKind::equals,
                           RelKind::contains, RelKind::during,  RelKind::starts,
                           RelKind::finishes};
  for (int i = 0; i < 2000; ++i) {
    RelKind k = kinds[kind_pick(rng)];
    std::vector<Bound> bs;
    for (int a = 0; a < rel_arity(k); ++a) {
      ticks_t l = blo(rng);
      bs.emplace_back(l, l + bspan(rng));
    }
    Relation r(k, bs);
    ticks_t s1 = pt(rng), s2 = pt(rng);
    Interval a = iv(s1, s1 + 1 + pt(rng));
    Interval b = iv(s2, s2 + 1 + pt(rng));
    bool expanded = true;
    for (const auto& at : expand_relation(r)) {
      Relation prim(at.kind, {at.bound});
      expanded = expanded && (at.swapped ? holds(prim, b, a) : holds(prim, a, b));
    }
    CHECK(holds(r, a, b) == expanded);
  }
}

TEST_CASE("relation names round-trip") {
  for (RelKind k :
       {RelKind::start_before_start, RelKind::end_before_end, RelKind::start_before_end,
        RelKind::end_before_start, RelKind::meets, RelKind::met_by, RelKind::before,
        RelKind::after, RelKind::overlaps, RelKind::equals, RelKind::contains, RelKind::during,
        RelKind::starts, RelKind::finishes, RelKind::starts_at, RelKind::ends_at,
        RelKind::starts_before, RelKind::ends_before}) {
    auto back = rel_from_name(rel_name(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
  }
  CHECK_FALSE(rel_from_name("sideways").has_value());
}
