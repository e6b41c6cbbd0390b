#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tbp {

// Discrete time. All quantities are integer ticks; the single non-finite
// value is the saturating infinity below.
using ticks_t = std::int64_t;

// Kept well away from the int64 limits so that sums of two weights never
// overflow before saturation is applied.
inline constexpr ticks_t k_inf = std::numeric_limits<ticks_t>::max() / 4;

inline ticks_t sat_add(ticks_t a, ticks_t b) {
  if (a >= k_inf || b >= k_inf) return k_inf;
  if (a <= -k_inf || b <= -k_inf) return -k_inf;
  ticks_t r = a + b;
  if (r >= k_inf) return k_inf;
  if (r <= -k_inf) return -k_inf;
  return r;
}

// A time value: a non-negative number of ticks, or infinity.
struct TimeValue {
  ticks_t v = 0;

  constexpr TimeValue() = default;

  static TimeValue of(ticks_t n) {
    if (n < 0) throw std::invalid_argument("time value must be non-negative");
    TimeValue t;
    t.v = n >= k_inf ? k_inf : n;
    return t;
  }
  static constexpr TimeValue inf() {
    TimeValue t;
    t.v = k_inf;
    return t;
  }

  bool infinite() const { return v >= k_inf; }
  ticks_t value() const {
    if (infinite()) throw std::logic_error("infinite time value has no finite tick count");
    return v;
  }

  friend bool operator==(TimeValue a, TimeValue b) { return a.v == b.v; }
  friend bool operator!=(TimeValue a, TimeValue b) { return a.v != b.v; }
  friend bool operator<(TimeValue a, TimeValue b) { return a.v < b.v; }
  friend bool operator<=(TimeValue a, TimeValue b) { return a.v <= b.v; }
  friend bool operator>(TimeValue a, TimeValue b) { return a.v > b.v; }
  friend bool operator>=(TimeValue a, TimeValue b) { return a.v >= b.v; }
};

inline TimeValue tv(ticks_t n) { return TimeValue::of(n); }

inline std::string to_string(TimeValue t) {
  return t.infinite() ? std::string("+inf") : std::to_string(t.v);
}

// A closed interval [lb, ub]; lb is always finite, ub may be infinite.
struct Bound {
  TimeValue lb;
  TimeValue ub;

  Bound() : lb(TimeValue::of(0)), ub(TimeValue::of(0)) {}
  Bound(TimeValue l, TimeValue u) : lb(l), ub(u) {
    if (l.infinite()) throw std::invalid_argument("bound lower end must be finite");
    if (u < l) throw std::invalid_argument("bound upper end below lower end");
  }
  Bound(ticks_t l, ticks_t u) : Bound(TimeValue::of(l), u >= k_inf ? TimeValue::inf() : TimeValue::of(u)) {}

  bool contains(TimeValue t) const { return lb <= t && t <= ub; }
  bool singleton() const { return lb == ub; }

  friend bool operator==(const Bound& a, const Bound& b) { return a.lb == b.lb && a.ub == b.ub; }
  friend bool operator!=(const Bound& a, const Bound& b) { return !(a == b); }
};

inline Bound unbounded_above(ticks_t l) { return Bound(TimeValue::of(l), TimeValue::inf()); }

inline std::string to_string(const Bound& b) {
  return "[" + to_string(b.lb) + ", " + to_string(b.ub) + "]";
}

}  // namespace tbp
