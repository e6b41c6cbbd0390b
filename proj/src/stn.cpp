#include "tbp/stn.hpp"

#include <algorithm>
#include <stdexcept>

namespace tbp {

namespace {
constexpr std::size_t k_full_recompute_limit = 200;
}

TemporalNetwork::TemporalNetwork() { add_time_point(); }

TemporalNetwork::point_id TemporalNetwork::add_time_point() {
  point_id id = static_cast<point_id>(n_);
  ++n_;
  for (std::size_t i = 0; i + 1 < n_; ++i) ew_[i].push_back(k_inf);
  ew_.emplace_back(n_, k_inf);
  ew_[id][id] = 0;
  if (id != origin) ew_[id][origin] = 0;  // origin - p <= 0: nothing precedes the origin
  baseline_valid_ = false;
  pending_.clear();
  stale_ = true;
  return id;
}

void TemporalNetwork::check_point(point_id p) const {
  if (p >= n_) throw std::invalid_argument("unknown time point id " + std::to_string(p));
}

TemporalNetwork::PostReceipt TemporalNetwork::add_requirement(point_id a, point_id b,
                                                              const Bound& bound) {
  check_point(a);
  check_point(b);
  PostReceipt r;
  r.a = a;
  r.b = b;
  r.prev_ab = ew_[a][b];
  r.prev_ba = ew_[b][a];
  ticks_t ub = bound.ub.infinite() ? k_inf : bound.ub.v;
  ticks_t neg_lb = -bound.lb.v;
  if (ub < ew_[a][b]) {
    ew_[a][b] = ub;
    if (baseline_valid_) pending_.push_back({a, b, ub});
    r.changed = true;
  }
  if (neg_lb < ew_[b][a]) {
    ew_[b][a] = neg_lb;
    if (baseline_valid_) pending_.push_back({b, a, neg_lb});
    r.changed = true;
  }
  if (r.changed) stale_ = true;
  return r;
}

void TemporalNetwork::unpost(const PostReceipt& r) {
  if (!r.changed) return;
  check_point(r.a);
  check_point(r.b);
  ew_[r.a][r.b] = r.prev_ab;
  ew_[r.b][r.a] = r.prev_ba;
  baseline_valid_ = false;
  pending_.clear();
  stale_ = true;
}

std::size_t TemporalNetwork::mark_contingent(point_id s, point_id e, TimeValue dmin,
                                             TimeValue dmax, PostReceipt* requirement_receipt) {
  check_point(s);
  check_point(e);
  if (dmin.infinite() || dmax.infinite())
    throw std::invalid_argument("contingent duration bounds must be finite");
  if (dmin.v <= 0) throw std::invalid_argument("contingent duration lower bound must be positive");
  if (dmax < dmin) throw std::invalid_argument("contingent duration bounds inverted");
  PostReceipt r = add_requirement(s, e, Bound(dmin, dmax));
  if (requirement_receipt) *requirement_receipt = r;
  links_.push_back({s, e, dmin.v, dmax.v});
  return links_.size() - 1;
}

const TemporalNetwork::ContingentLink& TemporalNetwork::link(std::size_t i) const {
  if (i >= links_.size()) throw std::invalid_argument("unknown contingent link");
  return links_[i];
}

void TemporalNetwork::drop_last_contingent() {
  if (links_.empty()) throw std::logic_error("no contingent link to drop");
  links_.pop_back();
}

void TemporalNetwork::shrink_points(std::size_t count) {
  if (count > n_ || count == 0) throw std::invalid_argument("bad shrink target");
  for (const auto& l : links_)
    if (l.s >= count || l.e >= count)
      throw std::logic_error("shrinking points still referenced by a contingent link");
  n_ = count;
  ew_.resize(n_);
  for (auto& row : ew_) row.resize(n_);
  baseline_valid_ = false;
  pending_.clear();
  stale_ = true;
}

bool TemporalNetwork::full_recompute() {
  dist_ = ew_;
  for (std::size_t k = 0; k < n_; ++k) {
    const auto& dk = dist_[k];
    for (std::size_t i = 0; i < n_; ++i) {
      ticks_t dik = dist_[i][k];
      if (dik >= k_inf) continue;
      auto& di = dist_[i];
      for (std::size_t j = 0; j < n_; ++j) {
        ticks_t via = sat_add(dik, dk[j]);
        if (via < di[j]) di[j] = via;
      }
    }
  }
  for (std::size_t i = 0; i < n_; ++i)
    if (dist_[i][i] < 0) return false;
  return true;
}

bool TemporalNetwork::incremental_update() {
  for (const auto& p : pending_) {
    if (sat_add(dist_[p.b][p.a], p.w) < 0) return false;
    if (p.w >= dist_[p.a][p.b]) continue;
    for (std::size_t i = 0; i < n_; ++i) {
      ticks_t ia = dist_[i][p.a];
      if (ia >= k_inf) continue;
      ticks_t through = sat_add(ia, p.w);
      auto& di = dist_[i];
      const auto& db = dist_[p.b];
      for (std::size_t j = 0; j < n_; ++j) {
        ticks_t via = sat_add(through, db[j]);
        if (via < di[j]) di[j] = via;
      }
    }
  }
  return true;
}

bool TemporalNetwork::propagate() {
  if (!stale_) return consistent_;
  bool ok;
  if (baseline_valid_ && consistent_) {
    // Only fresh requirement posts since the last run: repair instead of
    // recomputing. Falls out of the small-network recompute rule because the
    // matrix is already exact for the prior constraint set.
    ok = incremental_update();
    if (!ok) {
      // The repair pass may have partially tightened the matrix; rebuild so a
      // later restore/unpost sequence starts from a clean baseline.
      baseline_valid_ = false;
    }
  } else {
    (void)k_full_recompute_limit;
    ok = full_recompute();
  }
  pending_.clear();
  propagated_ = true;
  consistent_ = ok;
  baseline_valid_ = ok;
  stale_ = false;
  return ok;
}

void TemporalNetwork::check_ready() const {
  if (stale_) throw std::logic_error("temporal network is stale; call propagate()");
  if (!propagated_ || !consistent_)
    throw std::logic_error("temporal network is inconsistent");
}

bool TemporalNetwork::consistent() const {
  if (stale_) throw std::logic_error("temporal network is stale; call propagate()");
  return consistent_;
}

Bound TemporalNetwork::bounds(point_id p) const {
  check_point(p);
  check_ready();
  ticks_t lb = -dist_[p][origin];
  ticks_t ub = dist_[origin][p];
  return Bound(TimeValue::of(lb), ub >= k_inf ? TimeValue::inf() : TimeValue::of(ub));
}

TemporalNetwork::Distance TemporalNetwork::distance(point_id a, point_id b) const {
  check_point(a);
  check_point(b);
  check_ready();
  Distance d;
  d.lo = dist_[b][a] >= k_inf ? -k_inf : -dist_[b][a];
  d.hi = dist_[a][b];
  return d;
}

bool TemporalNetwork::squeezed(std::size_t link_index) const {
  const ContingentLink& l = link(link_index);
  check_ready();
  ticks_t lo = -dist_[l.e][l.s];
  ticks_t hi = dist_[l.s][l.e];
  return lo > l.dmin || hi < l.dmax;
}

TemporalNetwork::Snapshot TemporalNetwork::snapshot() const {
  if (stale_) throw std::logic_error("cannot snapshot a stale network");
  Snapshot s;
  s.points = n_;
  s.dist = dist_;
  s.propagated = propagated_;
  s.consistent = consistent_;
  return s;
}

void TemporalNetwork::restore(Snapshot snap) {
  if (snap.points != n_)
    throw std::logic_error("snapshot restore with mismatched point count");
  dist_ = std::move(snap.dist);
  propagated_ = snap.propagated;
  consistent_ = snap.consistent;
  pending_.clear();
  baseline_valid_ = consistent_;
  stale_ = false;
}

}  // namespace tbp
