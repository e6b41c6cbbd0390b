#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbp/time.hpp"

namespace tbp {

// Qualitative temporal relations between tokens. The first four entries are
// the primitive interval relations everything else expands into; the two
// point primitives anchor a token endpoint to an absolute time value.
enum class RelKind : unsigned char {
  // primitive, token-token
  start_before_start,
  end_before_end,
  start_before_end,
  end_before_start,
  // primitive, token-point
  starts_before,
  ends_before,
  // derived, token-token
  meets,
  met_by,
  before,
  after,
  overlaps,
  equals,
  contains,
  during,
  starts,
  finishes,
  // derived, token-point
  starts_at,
  ends_at,
};

bool rel_is_primitive(RelKind k);
bool rel_is_point(RelKind k);
// Number of [lb,ub] bound pairs the relation carries.
int rel_arity(RelKind k);
std::string rel_name(RelKind k);
std::optional<RelKind> rel_from_name(const std::string& name);

// One relation instance: a kind plus its bound pairs, plus the absolute
// anchor for point relations.
struct Relation {
  RelKind kind = RelKind::meets;
  std::vector<Bound> bounds;
  std::optional<TimeValue> anchor;

  Relation() = default;
  Relation(RelKind k, std::vector<Bound> bs = {}, std::optional<TimeValue> a = std::nullopt);

  friend bool operator==(const Relation& x, const Relation& y) {
    return x.kind == y.kind && x.bounds == y.bounds && x.anchor == y.anchor;
  }
};

// A primitive constraint produced by expansion. `swapped` means the operands
// are reversed: the constraint reads B-rel-A instead of A-rel-B. For point
// primitives the anchor replaces the second operand.
struct PrimitiveAtom {
  RelKind kind = RelKind::start_before_start;
  Bound bound;
  bool swapped = false;
  std::optional<TimeValue> anchor;

  friend bool operator==(const PrimitiveAtom& x, const PrimitiveAtom& y) {
    return x.kind == y.kind && x.bound == y.bound && x.swapped == y.swapped && x.anchor == y.anchor;
  }
};

// Rewrites any relation into primitive constraints. Primitive input passes
// through unchanged. Throws std::invalid_argument on an arity mismatch or a
// missing/unexpected anchor.
std::vector<PrimitiveAtom> expand_relation(const Relation& r);

// A concrete token extent used for semantic evaluation.
struct Interval {
  TimeValue s;
  TimeValue e;
};

// Truth of a token-token relation on concrete intervals.
bool holds(const Relation& r, const Interval& a, const Interval& b);
// Truth of a token-point relation against the anchor stored in `r`.
bool holds(const Relation& r, const Interval& a);

std::string to_string(const Relation& r);

}  // namespace tbp
