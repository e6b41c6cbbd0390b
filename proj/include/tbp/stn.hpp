#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tbp/time.hpp"

namespace tbp {

// Simple temporal network over discrete time points. Point 0 is the origin;
// every point is implicitly constrained to lie at or after it. Mutations mark
// the network stale; nothing is derived until propagate() runs. Queries on a
// stale or inconsistent network throw.
class TemporalNetwork {
 public:
  using point_id = std::uint32_t;
  static constexpr point_id origin = 0;

  // Undo token for one requirement post: the explicit weights the pair held
  // before the post.
  struct PostReceipt {
    point_id a = 0;
    point_id b = 0;
    ticks_t prev_ab = k_inf;
    ticks_t prev_ba = k_inf;
    bool changed = false;

    friend bool operator==(const PostReceipt&, const PostReceipt&) = default;
  };

  struct ContingentLink {
    point_id s = 0;
    point_id e = 0;
    ticks_t dmin = 0;
    ticks_t dmax = 0;

    friend bool operator==(const ContingentLink&, const ContingentLink&) = default;
  };

  // Saved propagation state; lets a caller run a trial post/propagate cycle
  // and return to a valid matrix without a full recomputation.
  struct Snapshot {
    std::size_t points = 0;
    std::vector<std::vector<ticks_t>> dist;
    bool propagated = false;
    bool consistent = false;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
  };

  TemporalNetwork();

  point_id add_time_point();
  std::size_t point_count() const { return n_; }

  // Intersects [lb,ub] onto the distance b - a. Throws on unknown ids.
  PostReceipt add_requirement(point_id a, point_id b, const Bound& bound);
  // Restores the explicit weights recorded in the receipt.
  void unpost(const PostReceipt& r);

  // Declares (s,e) an uncontrollable duration with 0 < dmin <= dmax < inf and
  // posts the matching requirement. Returns the link index.
  std::size_t mark_contingent(point_id s, point_id e, TimeValue dmin, TimeValue dmax,
                              PostReceipt* requirement_receipt = nullptr);
  std::size_t link_count() const { return links_.size(); }
  const ContingentLink& link(std::size_t i) const;
  // Undo helper for the most recently added link; the caller unposts the
  // companion requirement separately.
  void drop_last_contingent();

  // Undo helper for trailing points added since `count` was point_count().
  // All constraints touching them must have been unposted first.
  void shrink_points(std::size_t count);

  // Recomputes the minimal network. Returns false on inconsistency. Repeated
  // calls without intervening mutations are no-ops with the same verdict.
  bool propagate();

  bool stale() const { return stale_; }
  bool consistent() const;

  // [-d(p,origin), d(origin,p)]; requires a successful propagate.
  Bound bounds(point_id p) const;

  // Implied range of (b - a); lo may be negative, hi may be k_inf.
  struct Distance {
    ticks_t lo = 0;
    ticks_t hi = 0;
  };
  Distance distance(point_id a, point_id b) const;

  // True iff the implied duration range of the link is a strict sub-interval
  // of its declared [dmin, dmax]. Requires a successful propagate.
  bool squeezed(std::size_t link_index) const;

  Snapshot snapshot() const;
  void restore(Snapshot snap);

  friend bool operator==(const TemporalNetwork&, const TemporalNetwork&) = default;

 private:
  void check_point(point_id p) const;
  void check_ready() const;
  bool full_recompute();
  bool incremental_update();

  std::size_t n_ = 0;
  std::vector<std::vector<ticks_t>> ew_;    // explicit weights
  std::vector<std::vector<ticks_t>> dist_;  // minimal network
  std::vector<ContingentLink> links_;
  // Explicit tightenings since the last propagate, applied incrementally when
  // the previous matrix is still a valid baseline.
  struct Pending {
    point_id a;
    point_id b;
    ticks_t w;

    friend bool operator==(const Pending&, const Pending&) = default;
  };
  std::vector<Pending> pending_;
  bool baseline_valid_ = false;  // dist_ matches ew_ minus pending_
  bool stale_ = true;
  bool propagated_ = false;
  bool consistent_ = false;
};

}  // namespace tbp
