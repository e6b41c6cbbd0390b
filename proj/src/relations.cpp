#include "tbp/relations.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace tbp {

namespace {

struct KindInfo {
  RelKind kind;
  const char* name;
  int arity;
  bool point;
  bool primitive;
};

constexpr std::array<KindInfo, 18> k_kinds{{
    {RelKind::start_before_start, "start_before_start", 1, false, true},
    {RelKind::end_before_end, "end_before_end", 1, false, true},
    {RelKind::start_before_end, "start_before_end", 1, false, true},
    {RelKind::end_before_start, "end_before_start", 1, false, true},
    {RelKind::starts_before, "starts_before", 1, true, true},
    {RelKind::ends_before, "ends_before", 1, true, true},
    {RelKind::meets, "meets", 0, false, false},
    {RelKind::met_by, "met_by", 0, false, false},
    {RelKind::before, "before", 1, false, false},
    {RelKind::after, "after", 1, false, false},
    {RelKind::overlaps, "overlaps", 2, false, false},
    {RelKind::equals, "equals", 0, false, false},
    {RelKind::contains, "contains", 2, false, false},
    {RelKind::during, "during", 2, false, false},
    {RelKind::starts, "starts", 1, false, false},
    {RelKind::finishes, "finishes", 1, false, false},
    {RelKind::starts_at, "starts_at", 0, true, false},
    {RelKind::ends_at, "ends_at", 0, true, false},
}};

const KindInfo& info(RelKind k) {
  for (const auto& ki : k_kinds)
    if (ki.kind == k) return ki;
  throw std::invalid_argument("unknown relation kind");
}

Bound zero() { return Bound(0, 0); }
Bound any() { return unbounded_above(0); }

}  // namespace

bool rel_is_primitive(RelKind k) { return info(k).primitive; }
bool rel_is_point(RelKind k) { return info(k).point; }
int rel_arity(RelKind k) { return info(k).arity; }
std::string rel_name(RelKind k) { return info(k).name; }

std::optional<RelKind> rel_from_name(const std::string& name) {
  for (const auto& ki : k_kinds)
    if (name == ki.name) return ki.kind;
  return std::nullopt;
}

Relation::Relation(RelKind k, std::vector<Bound> bs, std::optional<TimeValue> a)
    : kind(k), bounds(std::move(bs)), anchor(a) {
  const auto& ki = info(k);
  if (static_cast<int>(bounds.size()) != ki.arity)
    throw std::invalid_argument("relation " + std::string(ki.name) + " takes " +
                                std::to_string(ki.arity) + " bound pair(s)");
  if (ki.point != anchor.has_value())
    throw std::invalid_argument(ki.point ? "point relation needs an anchor"
                                         : "interval relation takes no anchor");
}

std::vector<PrimitiveAtom> expand_relation(const Relation& r) {
  // Validate arity/anchor even for pre-built structs.
  Relation checked(r.kind, r.bounds, r.anchor);
  auto atom = [](RelKind k, Bound b, bool swapped) {
    PrimitiveAtom a;
    a.kind = k;
    a.bound = b;
    a.swapped = swapped;
    return a;
  };
  auto point = [&](RelKind k, Bound b) {
    PrimitiveAtom a;
    a.kind = k;
    a.bound = b;
    a.anchor = r.anchor;
    return a;
  };
  switch (r.kind) {
    case RelKind::start_before_start:
    case RelKind::end_before_end:
    case RelKind::start_before_end:
    case RelKind::end_before_start:
      return {atom(r.kind, r.bounds[0], false)};
    case RelKind::starts_before:
    case RelKind::ends_before:
      return {point(r.kind, r.bounds[0])};
    case RelKind::meets:
      return {atom(RelKind::end_before_start, zero(), false)};
    case RelKind::met_by:
      return {atom(RelKind::end_before_start, zero(), true)};
    case RelKind::before:
      return {atom(RelKind::end_before_start, r.bounds[0], false)};
    case RelKind::after:
      return {atom(RelKind::end_before_start, r.bounds[0], true)};
    case RelKind::overlaps:
      // A starts first, B's start falls inside A, A ends inside B.
      return {atom(RelKind::start_before_start, r.bounds[0], false),
              atom(RelKind::end_before_end, r.bounds[1], false),
              atom(RelKind::start_before_end, any(), true)};
    case RelKind::equals:
      return {atom(RelKind::start_before_start, zero(), false),
              atom(RelKind::end_before_end, zero(), false)};
    case RelKind::contains:
      return {atom(RelKind::start_before_start, r.bounds[0], false),
              atom(RelKind::end_before_end, r.bounds[1], true)};
    case RelKind::during:
      return {atom(RelKind::start_before_start, r.bounds[0], true),
              atom(RelKind::end_before_end, r.bounds[1], false)};
    case RelKind::starts:
      return {atom(RelKind::start_before_start, zero(), false),
              atom(RelKind::end_before_end, r.bounds[0], false)};
    case RelKind::finishes:
      return {atom(RelKind::start_before_start, r.bounds[0], false),
              atom(RelKind::end_before_end, zero(), false)};
    case RelKind::starts_at:
      return {point(RelKind::starts_before, zero())};
    case RelKind::ends_at:
      return {point(RelKind::ends_before, zero())};
  }
  throw std::invalid_argument("unknown relation kind");
}

namespace {

// lb <= delta <= ub where delta may exceed any finite bound.
bool within(ticks_t delta, const Bound& b) {
  if (delta < b.lb.v) return false;
  return b.ub.infinite() || delta <= b.ub.v;
}

bool atom_holds(const PrimitiveAtom& at, const Interval& a, const Interval& b) {
  const Interval& x = at.swapped ? b : a;
  const Interval& y = at.swapped ? a : b;
  switch (at.kind) {
    case RelKind::start_before_start:
      return within(y.s.v - x.s.v, at.bound);
    case RelKind::end_before_end:
      return within(y.e.v - x.e.v, at.bound);
    case RelKind::start_before_end:
      return within(y.e.v - x.s.v, at.bound);
    case RelKind::end_before_start:
      return within(y.s.v - x.e.v, at.bound);
    default:
      throw std::logic_error("point atom evaluated with two intervals");
  }
}

bool point_atom_holds(const PrimitiveAtom& at, const Interval& a) {
  ticks_t t = at.anchor->v;
  switch (at.kind) {
    case RelKind::starts_before:
      return within(t - a.s.v, at.bound);
    case RelKind::ends_before:
      return within(t - a.e.v, at.bound);
    default:
      throw std::logic_error("interval atom evaluated against a point");
  }
}

}  // namespace

bool holds(const Relation& r, const Interval& a, const Interval& b) {
  if (rel_is_point(r.kind)) throw std::invalid_argument("point relation needs holds(r, a)");
  auto atoms = expand_relation(r);
  return std::all_of(atoms.begin(), atoms.end(),
                     [&](const PrimitiveAtom& at) { return atom_holds(at, a, b); });
}

bool holds(const Relation& r, const Interval& a) {
  if (!rel_is_point(r.kind)) throw std::invalid_argument("interval relation needs holds(r, a, b)");
  auto atoms = expand_relation(r);
  return std::all_of(atoms.begin(), atoms.end(),
                     [&](const PrimitiveAtom& at) { return point_atom_holds(at, a); });
}

std::string to_string(const Relation& r) {
  std::string s = rel_name(r.kind);
  for (const auto& b : r.bounds) s += " " + to_string(b);
  if (r.anchor) s += " @" + to_string(*r.anchor);
  return s;
}

}  // namespace tbp
