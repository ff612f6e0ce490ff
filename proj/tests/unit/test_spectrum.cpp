#include <doctest/doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "quasispec/errors.hpp"
#include "quasispec/spectrum.hpp"

using namespace quasispec;

namespace {

SpectrumRecord spec(const SamplingFunction& f, Approximant pq, double e_res = 1e-3,
                    std::int64_t theta_grid = 0) {
  SpectrumOptions o;
  o.e_res = e_res;
  o.theta_grid = theta_grid;
  return spectrum_rational(f, pq, o);
}

// Union over theta and a swept Bloch phase of the Floquet-block eigenvalues.
IntervalSet floquet_oracle(const SamplingFunction& f, Approximant pq, std::int64_t theta_grid,
                           int bloch_steps) {
  std::vector<Interval> raw;
  for (std::int64_t t = 0; t < theta_grid; ++t) {
    const double theta = static_cast<double>(t) / static_cast<double>(theta_grid);
    std::vector<double> lo, hi;
    for (int b = 0; b <= bloch_steps; ++b) {
      const auto ev =
          floquet_eigenvalues(f, pq, theta, std::numbers::pi * b / static_cast<double>(bloch_steps));
      if (lo.empty()) {
        lo = hi = ev;
      } else {
        for (std::size_t i = 0; i < ev.size(); ++i) {
          lo[i] = std::min(lo[i], ev[i]);
          hi[i] = std::max(hi[i], ev[i]);
        }
      }
    }
    for (std::size_t i = 0; i < lo.size(); ++i) raw.push_back({lo[i], hi[i]});
  }
  return IntervalSet::normalize(std::move(raw));
}

std::vector<Approximant> golden(std::int64_t q_max) {
  return approximants_in_range(ContinuedFraction::golden_mean(), 1, q_max);
}

}  // namespace

TEST_CASE("discriminant examples") {
  const auto zero = SamplingFunction::zero();
  for (double e : {-1.5, 0.0, 0.7}) CHECK(discriminant(zero, {0, 1, 0}, e, 0.3) == doctest::Approx(e));
  const double lam = 1.3;
  const auto f = SamplingFunction::cosine(lam);
  for (double th : {0.0, 0.1, 0.37}) {
    for (double e : {-2.0, 0.5, 3.0}) {
      const double c = std::cos(2.0 * std::numbers::pi * th);
      CHECK(discriminant(f, {1, 2, 1}, e, th) ==
            doctest::Approx(e * e - 4 * lam * lam * c * c - 2).epsilon(1e-12));
      CHECK(discriminant(f, {2, 5, 3}, e, th + 0.2) ==
            doctest::Approx(discriminant(f, {2, 5, 3}, e, th)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(discriminant(f, {0, 0, 0}, 0.0, 0.0), PreconditionError);
}

TEST_CASE("spectrum_rational: q = 1 and q = 2 band formulas") {
  for (double lam : {0.5, 1.0, 2.0}) {
    const auto f = SamplingFunction::cosine(lam);
    const auto s1 = spec(f, {0, 1, 0});
    REQUIRE(s1.bands.size() == 1);
    CHECK(s1.bands.intervals()[0].lo == doctest::Approx(-2 - 2 * lam).epsilon(1e-9));
    CHECK(s1.bands.intervals()[0].hi == doctest::Approx(2 + 2 * lam).epsilon(1e-9));
    const auto s2 = spec(f, {1, 2, 1});
    REQUIRE(s2.bands.size() == 1);
    CHECK(s2.bands.measure() == doctest::Approx(4 * std::sqrt(1 + lam * lam)).epsilon(1e-9));
  }
  CHECK(spec(SamplingFunction::cosine(1.0), {1, 2, 1}).bands.measure() ==
        doctest::Approx(5.6569).epsilon(1e-4));
}

TEST_CASE("spectrum_rational: record invariants") {
  const auto f = SamplingFunction::cosine(1.7);
  const auto [lo, hi] = energy_window(f);
  for (const auto& a : golden(34)) {
    const auto s = spec(f, a);
    CHECK(s.bands.size() <= static_cast<std::size_t>(a.q));
    CHECK(s.bands.intervals().front().lo >= lo);
    CHECK(s.bands.intervals().back().hi <= hi);
    CHECK(s.theta_grid % a.q == 0);
    CHECK(s.bands.measure() >= 4 * 0.7 - 1e-7);
    const auto back = SpectrumRecord::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back.bands == s.bands);
    CHECK(back.frequency.p == s.frequency.p);
    CHECK(back.frequency.q == s.frequency.q);
    CHECK(back.theta_grid == s.theta_grid);
  }
}

TEST_CASE("spectrum_rational agrees with a Floquet-block oracle") {
  const double e_res = 1e-3;
  struct Case {
    SamplingFunction f;
    Approximant pq;
  };
  std::vector<std::complex<double>> c = {{0.3, 0.2}, {0.5, 0}, {0.0, 0}, {0.5, 0}, {0.3, -0.2}};
  const std::vector<Case> cases = {
      {SamplingFunction::cosine(1.5), {2, 5, 3}},
      {SamplingFunction::cosine(0.8), {3, 8, 4}},
      {SamplingFunction::trig(TrigPolynomial(c)), {1, 3, 2}},
  };
  for (const auto& cs : cases) {
    const auto s = spec(cs.f, cs.pq, e_res);
    // bands move continuously in theta: the oracle needs a much finer phase grid
    const auto oracle = floquet_oracle(cs.f, cs.pq, 512 * cs.pq.q, 16);
    const double tol = 2.0 * e_res * static_cast<double>(s.bands.size());
    CHECK(std::abs(s.bands.measure() - oracle.measure()) <= tol);
    CHECK(hausdorff(s.bands, oracle) <= e_res);
  }
}

TEST_CASE("spectrum_rational: refining the theta grid only grows the bands") {
  const auto w = SamplingFunction::scaled(2.0, SamplingFunction::weierstrass(0.5));
  const Approximant pq{3, 5, 4};
  const auto coarse = spec(w, pq, 1e-3, 5 * 40);
  const auto fine = spec(w, pq, 1e-3, 5 * 160);
  CHECK(fine.bands.measure() >= coarse.bands.measure() - 2e-10 * 2 * coarse.bands.size());
  CHECK(one_sided(coarse.bands, fine.bands) <= 1e-9);
}

TEST_CASE("spectrum_rational: Aubry-Andre measure bound and errors") {
  for (double lam : {0.5, 2.0}) {
    const auto f = SamplingFunction::cosine(lam);
    for (const auto& a : golden(89)) {
      CHECK(spec(f, a, 1e-3).bands.measure() >= 4 * std::abs(1 - lam) - 1e-7);
    }
  }
  CHECK_THROWS_AS(spec(SamplingFunction::cosine(1.0), {0, 1, 0}, 0.0), PreconditionError);
}

TEST_CASE("effective_theta_grid defaults") {
  CHECK(effective_theta_grid(SamplingFunction::cosine(1.0), 5, 0) == 80);
  CHECK(effective_theta_grid(SamplingFunction::weierstrass(0.5), 5, 0) % 5 == 0);
  CHECK(effective_theta_grid(SamplingFunction::weierstrass(0.5), 5, 0) >= 4096);
  CHECK(effective_theta_grid(SamplingFunction::cosine(1.0), 7, 30) == 35);
}

TEST_CASE("l_plus_set examples") {
  const auto golden_cf = ContinuedFraction::golden_mean();
  LPlusOptions o;
  o.k = 300;
  o.m_theta = 100;
  SUBCASE("free operator: empty") {
    CHECK(l_plus_set(SamplingFunction::zero(), golden_cf, 0.05, o).set.empty());
  }
  SUBCASE("supercritical cosine covers the window") {
    const auto f = SamplingFunction::cosine(3.0);
    const auto r = l_plus_set(f, golden_cf, 0.5, o);
    const auto [lo, hi] = energy_window(f);
    REQUIRE(r.set.size() == 1);
    CHECK(r.set.intervals()[0].lo == lo);
    CHECK(r.set.intervals()[0].hi == hi);
  }
  SUBCASE("monotone in chi") {
    const auto f = SamplingFunction::cosine(1.2);
    const auto a = l_plus_set(f, golden_cf, 0.05, o);
    const auto b = l_plus_from_profile(f, a.profile, 0.3);  // above ln 1.2 on the spectrum
    CHECK(set_difference(b.set, a.set).measure() == 0.0);
    CHECK(b.set.measure() < a.set.measure());
  }
  CHECK_THROWS_AS(l_plus_set(SamplingFunction::zero(), golden_cf, 0.0, o), PreconditionError);
}

TEST_CASE("convergence_table: first rows and shape") {
  const auto cf = ContinuedFraction::golden_mean();
  const auto f = SamplingFunction::cosine(2.0);
  SpectrumOptions o;
  o.e_res = 1e-3;
  const auto list = golden(21);
  const auto t = convergence_table(cf, list, direct_provider(f, o));
  REQUIRE(t.rows.size() == list.size());
  CHECK(t.rows[0].measure == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(t.rows[1].measure == doctest::Approx(4 * std::sqrt(5.0)).epsilon(1e-9));
  CHECK(t.rows[1].measure == doctest::Approx(8.944).epsilon(1e-4));
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].measure <= t.rows[i - 1].measure);
  CHECK(t.rows.back().gap_deepest == 0.0);

  std::istringstream in(t.to_csv());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "n,p,q,bands,measure,measure_lplus,one_sided_next,one_sided_next_lplus,"
        "setwise_gap_deepest,setwise_gap_deepest_lplus");

  CHECK_THROWS_AS(convergence_table(cf, {list[0]}, direct_provider(f, o)), PreconditionError);
  CHECK_THROWS_AS(convergence_table(cf, {list[0], Approximant{2, 7, 2}}, direct_provider(f, o)),
                  PreconditionError);
}

TEST_CASE("holder_fit: identical spectra drop every pair") {
  const auto cf = ContinuedFraction::golden_mean();
  const auto list = golden(21);
  const SpectrumProvider same = [](const Approximant& a) {
    SpectrumRecord r;
    r.frequency = a;
    r.bands = IntervalSet::normalize({{-1, 1}});
    return r;
  };
  CHECK_THROWS_AS(holder_fit(cf, consecutive_pairs(list), same), NumericalError);
}

TEST_CASE("holder_fit: slope recovered from synthetic spectra") {
  // S(p/q) = [-1, 1 + |p/q - omega|^0.75]: D = |w' - w''|^0.75-ish.
  const auto cf = ContinuedFraction::golden_mean();
  const double omega = cf.value();
  const SpectrumProvider synthetic = [omega](const Approximant& a) {
    SpectrumRecord r;
    r.frequency = a;
    r.bands = IntervalSet::normalize({{-1, 1 + std::pow(std::abs(a.value() - omega), 0.75)}});
    return r;
  };
  const auto fit = holder_fit(cf, consecutive_pairs(golden(610)), synthetic);
  CHECK(fit.beta_hat == doctest::Approx(0.75).epsilon(0.05));
  CHECK(consecutive_pairs(golden(8)).size() == 4);
}
