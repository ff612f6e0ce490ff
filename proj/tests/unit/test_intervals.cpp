#include <doctest/doctest.h>

#include <cmath>
#include <random>

#include "quasispec/errors.hpp"
#include "quasispec/intervals.hpp"

using namespace quasispec;

namespace {

IntervalSet S(std::vector<Interval> raw) { return IntervalSet::normalize(std::move(raw)); }

IntervalSet random_set(std::mt19937_64& rng, int max_parts = 5) {
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Interval> raw;
  const int n = 1 + static_cast<int>(rng() % max_parts);
  for (int i = 0; i < n; ++i) {
    const double a = 10.0 * u();
    raw.push_back({a, a + 2.0 * u()});
  }
  return S(raw);
}

// Indicator on cell midpoints of a fine grid over [-1, 13].
constexpr int kCells = 140000;
constexpr double kLo = -1.0, kHi = 13.0;
double cell() { return (kHi - kLo) / kCells; }
double mid(int i) { return kLo + (i + 0.5) * cell(); }

}  // namespace

TEST_CASE("normalize examples") {
  CHECK(S({{0, 1}, {0.5, 2}}).intervals() == std::vector<Interval>{{0, 2}});
  CHECK(IntervalSet::normalize({{0, 1}, {1 + 1e-9, 2}}, 1e-8).intervals() ==
        std::vector<Interval>{{0, 2}});
  CHECK(IntervalSet::normalize({{0, 1}, {1 + 1e-9, 2}}, 1e-10).size() == 2);
  CHECK(S({}).empty());
  CHECK(S({}).measure() == 0.0);
  CHECK(S({{2, 1}}).intervals() == std::vector<Interval>{{1, 2}});
  CHECK_THROWS_AS(S({{0, std::nan("")}}), PreconditionError);
  CHECK_THROWS_AS(IntervalSet::normalize({{0, 1}}, -1.0), PreconditionError);
}

TEST_CASE("measure examples") {
  CHECK(S({{0, 1}, {2, 3.5}}).measure() == 2.5);
  const auto s = S({{0, 1}, {2, 3}, {5, 5.5}});
  CHECK(s.fattened(0.1).measure() <= s.measure() + 2 * 3 * 0.1 + 1e-15);
  CHECK(S({{1, 1}}).measure() == 0.0);
  CHECK(S({{1, 1}}).contains(1.0));
}

TEST_CASE("hausdorff and one_sided examples") {
  const auto a = S({{0, 1}});
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(a, S({{0.5, 1.5}})) == 0.5);
  CHECK(one_sided(a, S({{-0.01, 1.01}})) == 0.0);
  CHECK(one_sided(S({{0, 0}}), S({{3, 4}})) == 3.0);
  CHECK(one_sided(S({{0, 10}}), S({{0, 1}, {9, 10}})) == 4.0);  // gap midpoint
  CHECK_THROWS_AS(hausdorff(a, S({})), PreconditionError);
  CHECK_THROWS_AS(one_sided(S({}), a), PreconditionError);
}

TEST_CASE("set operation examples") {
  CHECK(set_intersection(S({{0, 2}}), S({{1, 3}})).intervals() == std::vector<Interval>{{1, 2}});
  CHECK(set_union(S({{0, 1}}), S({{2, 3}})) == S({{0, 1}, {2, 3}}));
  CHECK(set_difference(S({{0, 2}}), S({{1, 3}})).intervals() == std::vector<Interval>{{0, 1}});
  CHECK(apply(SetOp::kDifference, S({{0, 5}}), S({{1, 2}, {3, 4}})) == S({{0, 1}, {2, 3}, {4, 5}}));
}

TEST_CASE("setwise_gap examples") {
  const auto a = S({{0, 1}});
  CHECK(setwise_gap(a, a) == 0.0);
  CHECK(setwise_gap(a, S({{0, 1.25}})) == 0.25);
  const auto b = S({{0.5, 3}});
  CHECK(setwise_gap(a, b) == setwise_gap(b, a));
}

TEST_CASE("json round trip") {
  const auto s = S({{-1.5, 0.25}, {1.0 / 3.0, 2}});
  CHECK(IntervalSet::from_json(nlohmann::json::parse(s.to_json().dump())) == s);
}

TEST_CASE("property: operations agree with an indicator oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_set(rng);
    const auto b = random_set(rng);
    const IntervalSet results[] = {set_union(a, b), set_intersection(a, b), set_difference(a, b)};
    for (int op = 0; op < 3; ++op) {
      int agree_cells = 0;
      for (int i = 0; i < kCells; ++i) {
        const double x = mid(i);
        const bool ia = a.contains(x), ib = b.contains(x);
        const bool want = op == 0 ? (ia || ib) : op == 1 ? (ia && ib) : (ia && !ib);
        agree_cells += (results[op].contains(x) == want) ? 1 : 0;
      }
      // One cell of slack at every endpoint.
      const int endpoints = 2 * static_cast<int>(a.size() + b.size());
      CHECK(kCells - agree_cells <= endpoints);
    }
    // measure: additive over a = (a n b) u (a \ b), monotone under inclusion
    CHECK(a.measure() ==
          doctest::Approx(set_intersection(a, b).measure() + set_difference(a, b).measure()));
    CHECK(set_intersection(a, b).measure() <= a.measure() + 1e-12);
    CHECK(set_union(a, b).measure() >= a.measure() - 1e-12);
  }
}

TEST_CASE("property: hausdorff is a metric; one_sided is dominated") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_set(rng), b = random_set(rng), c = random_set(rng);
    CHECK(hausdorff(a, b) == hausdorff(b, a));
    CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12);
    CHECK(one_sided(a, b) <= hausdorff(a, b));
    CHECK(hausdorff(a, a) == 0.0);
  }
}

TEST_CASE("property: one_sided matches a brute-force sup") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_set(rng), b = random_set(rng);
    double brute = 0.0;
    for (int i = 0; i < kCells; i += 7) {
      const double x = mid(i);
      if (a.contains(x)) brute = std::max(brute, b.distance(x));
    }
    for (const auto& iv : a.intervals()) brute = std::max({brute, b.distance(iv.lo), b.distance(iv.hi)});
    const double exact = one_sided(a, b);
    CHECK(exact >= brute - 1e-12);
    CHECK(exact <= brute + 7 * cell());
  }
}
