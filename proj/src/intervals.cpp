#include "quasispec/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasispec/errors.hpp"

namespace quasispec {

IntervalSet IntervalSet::normalize(std::vector<Interval> raw, double merge_tol) {
  if (!(merge_tol >= 0.0)) throw PreconditionError("normalize: merge_tol must be >= 0");
  for (auto& iv : raw) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) {
      throw PreconditionError("normalize: NaN interval endpoint");
    }
    if (iv.lo > iv.hi) std::swap(iv.lo, iv.hi);
  }
  std::sort(raw.begin(), raw.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  IntervalSet out;
  for (const auto& iv : raw) {
    if (!out.parts_.empty() && iv.lo - out.parts_.back().hi <= merge_tol) {
      out.parts_.back().hi = std::max(out.parts_.back().hi, iv.hi);
    } else {
      out.parts_.push_back(iv);
    }
  }
  return out;
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const auto& iv : parts_) m += iv.length();
  return m;
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == parts_.begin()) return false;
  --it;
  return x <= it->hi;
}

double IntervalSet::distance(double x) const {
  if (parts_.empty()) throw PreconditionError("distance to an empty interval set");
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  double d = std::numeric_limits<double>::infinity();
  if (it != parts_.end()) d = it->lo - x;
  if (it != parts_.begin()) {
    const auto& prev = *std::prev(it);
    d = std::min(d, x <= prev.hi ? 0.0 : x - prev.hi);
  }
  return d;
}

IntervalSet IntervalSet::fattened(double delta) const {
  std::vector<Interval> raw;
  raw.reserve(parts_.size());
  for (const auto& iv : parts_) raw.push_back({iv.lo - delta, iv.hi + delta});
  return normalize(std::move(raw), 0.0);
}

nlohmann::json IntervalSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& iv : parts_) arr.push_back({iv.lo, iv.hi});
  return arr;
}

IntervalSet IntervalSet::from_json(const nlohmann::json& j) {
  std::vector<Interval> raw;
  for (const auto& pair : j) raw.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  return normalize(std::move(raw), 0.0);
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> raw(a.intervals());
  raw.insert(raw.end(), b.intervals().begin(), b.intervals().end());
  return IntervalSet::normalize(std::move(raw), 0.0);
}

IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out;
  const auto& x = a.intervals();
  const auto& y = b.intervals();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double lo = std::max(x[i].lo, y[j].lo);
    const double hi = std::min(x[i].hi, y[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (x[i].hi < y[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalSet::normalize(std::move(out), 0.0);
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out;
  const auto& y = b.intervals();
  std::size_t j = 0;
  for (const auto& iv : a.intervals()) {
    double lo = iv.lo;
    bool alive = true;
    while (j < y.size() && y[j].hi < lo) ++j;
    std::size_t k = j;
    while (alive && k < y.size() && y[k].lo <= iv.hi) {
      if (y[k].lo > lo) out.push_back({lo, y[k].lo});
      if (y[k].hi >= iv.hi) {
        alive = false;
      } else {
        lo = std::max(lo, y[k].hi);
        ++k;
      }
    }
    if (alive) out.push_back({lo, iv.hi});
  }
  return IntervalSet::normalize(std::move(out), 0.0);
}

IntervalSet apply(SetOp op, const IntervalSet& a, const IntervalSet& b) {
  switch (op) {
    case SetOp::kUnion:
      return set_union(a, b);
    case SetOp::kIntersection:
      return set_intersection(a, b);
    case SetOp::kDifference:
      return set_difference(a, b);
  }
  return {};
}

double one_sided(const IntervalSet& a, const IntervalSet& b) {
  if (a.empty() || b.empty()) throw PreconditionError("one_sided: empty interval set");
  // dist(., b) is piecewise linear; on each interval of a its maximum sits at
  // an endpoint or at the midpoint of a gap of b.
  const auto& gaps_of = b.intervals();
  double best = 0.0;
  for (const auto& iv : a.intervals()) {
    best = std::max(best, b.distance(iv.lo));
    best = std::max(best, b.distance(iv.hi));
    for (std::size_t k = 0; k + 1 < gaps_of.size(); ++k) {
      const double mid = 0.5 * (gaps_of[k].hi + gaps_of[k + 1].lo);
      if (mid > iv.lo && mid < iv.hi) best = std::max(best, b.distance(mid));
    }
  }
  return best;
}

double hausdorff(const IntervalSet& a, const IntervalSet& b) {
  return std::max(one_sided(a, b), one_sided(b, a));
}

double setwise_gap(const IntervalSet& a, const IntervalSet& b) {
  return set_difference(a, b).measure() + set_difference(b, a).measure();
}

}  // namespace quasispec
