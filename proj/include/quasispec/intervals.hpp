#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace quasispec {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals on the real line, sorted, with
/// hi_i < lo_{i+1}. Single points are allowed and carry zero measure.
class IntervalSet {
 public:
  static constexpr double kDefaultMergeTol = 1e-12;

  IntervalSet() = default;

  /// Sorts and merges intervals that overlap or are separated by a gap of
  /// at most merge_tol. Reversed pairs (lo > hi) are swapped. Throws
  /// PreconditionError on NaN endpoints or negative merge_tol.
  static IntervalSet normalize(std::vector<Interval> raw, double merge_tol = kDefaultMergeTol);

  const std::vector<Interval>& intervals() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }

  double measure() const;
  bool contains(double x) const;
  /// Distance from x to the set (0 inside). Throws on an empty set.
  double distance(double x) const;

  /// Every interval widened by delta on both sides, then re-merged.
  IntervalSet fattened(double delta) const;

  nlohmann::json to_json() const;
  static IntervalSet from_json(const nlohmann::json& j);

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> parts_;
};

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);
/// Closure of a \ b.
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);

enum class SetOp { kUnion, kIntersection, kDifference };
IntervalSet apply(SetOp op, const IntervalSet& a, const IntervalSet& b);

/// sup_{x in a} dist(x, b), exact from endpoints. Throws PreconditionError
/// if either set is empty.
double one_sided(const IntervalSet& a, const IntervalSet& b);

/// max(one_sided(a, b), one_sided(b, a)).
double hausdorff(const IntervalSet& a, const IntervalSet& b);

/// Lebesgue measure of the symmetric difference.
double setwise_gap(const IntervalSet& a, const IntervalSet& b);

}  // namespace quasispec
