// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quasispec/cocycle.hpp"
#include "quasispec/errors.hpp"
#include "quasispec/intervals.hpp"
#include "quasispec/lab.hpp"
#include "quasispec/rotation_cf.hpp"
#include "quasispec/sampling.hpp"
#include "quasispec/spectrum.hpp"
#include "quasispec/subadditive.hpp"

using namespace quasispec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances and settings.
constexpr double kAcceptEres = 1e-4;
constexpr double kMonotoneSlack = 1e-9;      // measure(q_n) <= measure(q_{n-1}) + slack
constexpr double kBandFormulaTol = 1e-8;     // q = 1, 2 closed forms
constexpr double kGapRatioMax = 0.15;        // C1
constexpr double kCriticalSlopeMax = -0.8;   // C2
constexpr double kPlateauTol = 0.05;         // C3
constexpr double kOracleTol = 0.05;          // C3 long-orbit agreement
constexpr double kFurmanTol = 0.05;          // C4
constexpr std::int64_t kPertKEps = 64;       // C5: bound asserted for k_eps <= k <= 300
constexpr double kIdentityTol = 1e-8;        // C6
constexpr double kGreenTol = 1e-8;           // C7
constexpr double kFejerSlope = -0.5;         // C9
constexpr double kFejerSlopeTol = 0.15;
constexpr double kHolderA = 1.0 / 3.0 - 0.05;  // C10a
constexpr double kHolderB = 0.5;               // C10b

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

const ContinuedFraction& golden_cf() {
  static const ContinuedFraction cf = ContinuedFraction::golden_mean();
  return cf;
}

std::vector<Approximant> golden_range(std::int64_t qmin, std::int64_t qmax) {
  return approximants_in_range(golden_cf(), qmin, qmax);
}

SpectrumOptions accept_opts() {
  SpectrumOptions o;
  o.e_res = kAcceptEres;
  return o;
}

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

// Shared between C1 and C2.
std::vector<double> golden_measures(double lambda) {
  const auto f = SamplingFunction::cosine(lambda);
  std::vector<double> out;
  for (const auto& a : golden_range(1, 89)) out.push_back(spectrum_rational(f, a, accept_opts()).bands.measure());
  return out;
}

Outcome c1_aubry_andre() {
  const auto m = golden_measures(2.0);  // q = 1, 2, 3, 5, ..., 89
  bool ok = std::abs(m[0] - 12.0) <= kBandFormulaTol &&
            std::abs(m[1] - 4.0 * std::sqrt(5.0)) <= kBandFormulaTol;
  bool mono = true;
  for (std::size_t i = 1; i < m.size(); ++i) mono = mono && m[i] <= m[i - 1] + kMonotoneSlack;
  const double ratio = (m.back() - 4.0) / (m[3] - 4.0);
  ok = ok && mono && ratio < kGapRatioMax;
  return {ok, "m(1)=" + fmt("%.10f", m[0]) + " m(2)=" + fmt("%.10f", m[1]) +
                  " m(89)=" + fmt("%.8f", m.back()) + " monotone=" + (mono ? "yes" : "no") +
                  " gap89/gap5=" + fmt("%.4f", ratio)};
}

Outcome c2_critical() {
  const auto m = golden_measures(1.0);
  const auto list = golden_range(1, 89);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].q < 8) continue;
    xs.push_back(std::log(static_cast<double>(list[i].q)));
    ys.push_back(std::log(m[i]));
  }
  const double slope = ls_slope(xs, ys);
  return {slope <= kCriticalSlopeMax,
          "slope=" + fmt("%.4f", slope) + " m(89)=" + fmt("%.6f", m.back())};
}

Outcome c3_plateau(unsigned workers) {
  const auto f = SamplingFunction::cosine(3.0);
  const double omega = golden_cf().value();
  const auto [lo, hi] = energy_window(f);
  const auto es = linspace(lo, hi, 200);
  const auto p = lyapunov_profile(f, omega, es, 10000, ThetaGrid::orbit(10000), workers);
  const double ln3 = std::log(3.0);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < es.size(); ++i) {
    if (p.values[i] < p.values[arg]) arg = i;
  }
  const double mn = p.values[arg];
  bool ok = std::abs(mn - ln3) <= kPlateauTol;
  // oracle: one orbit of 4x the depth through the plain product
  double worst = 0.0;
  for (std::size_t i = 0; i < es.size(); i += 20) {
    for (std::size_t j : {i, arg}) {
      const double oracle = iterate(f, omega, es[j], 0.0, 40000).log_norm() / 40000.0;
      worst = std::max(worst, std::abs(oracle - p.values[j]));
    }
  }
  ok = ok && mn >= ln3 - kPlateauTol && worst <= kOracleTol;
  return {ok, "min L=" + fmt("%.5f", mn) + " ln3=" + fmt("%.5f", ln3) +
                  " max|L-oracle|=" + fmt("%.2e", worst)};
}

Outcome c4_furman(unsigned workers) {
  const auto f = SamplingFunction::cosine(3.0);
  const double omega = golden_cf().value();
  const auto [lo, hi] = energy_window(f);
  const auto es = linspace(lo, hi, 200);
  const auto p = lyapunov_profile(f, omega, es, 3000, ThetaGrid::uniform(10000), workers);
  double worst = -1e300;
  for (std::size_t i = 0; i < es.size(); ++i) worst = std::max(worst, p.sup_over_theta[i] - p.values[i]);
  // the same quantity through the subadditive interface at one energy, for the record
  const auto g = furman_gap(SubadditiveCocycle::schrodinger(f, omega, 0.0), 3000, 10000, workers);
  const bool ok = worst < kFurmanTol;
  return {ok, "max_E (sup - mean)=" + fmt("%.5f", worst) + " furman gap(E=0)=" + fmt("%.5f", g.gap)};
}

Outcome c5_perturbation() {
  const double omega = golden_cf().value();
  const auto grid = ThetaGrid::orbit(1000);
  std::int64_t last_literal = 0;  // largest k <= 300 violating the bound
  bool ok = true;
  double margin = 1e300;
  auto check = [&](const SamplingFunction& f, double e, const Perturbation& pert) {
    for (const auto& r : perturbation_profile(f, omega, e, pert, 300, 0.1, grid)) {
      if (!r.within_bound()) last_literal = std::max(last_literal, r.k);
      if (r.k >= kPertKEps) {
        ok = ok && r.within_bound();
        margin = std::min(margin, r.log_bound - r.log_err);
      }
    }
  };
  for (double e : {0.0, 1.0, 2.5, -3.7}) check(SamplingFunction::cosine(3.0), e, Perturbation::energy_shift(1e-8));
  for (double e : {0.0, 1.0, 2.5, -3.7}) check(SamplingFunction::weierstrass(0.5), e, Perturbation::fejer(64));
  return {ok, "k in [" + std::to_string(kPertKEps) + ", 300]: min ln(bound/err)=" + fmt("%.3f", margin) +
                  "; literal all-k check violated up to k=" + std::to_string(last_literal)};
}

SamplingFunction random_family(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0:
      return SamplingFunction::cosine(0.2 + 3.0 * unit(rng));
    case 1: {
      const int deg = 1 + static_cast<int>(rng() % 4);
      std::vector<std::complex<double>> c(2 * deg + 1);
      c[deg] = 2.0 * unit(rng) - 1.0;
      for (int j = 1; j <= deg; ++j) {
        c[deg + j] = {2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
        c[deg - j] = std::conj(c[deg + j]);
      }
      return SamplingFunction::trig(TrigPolynomial(c));
    }
    default:
      return SamplingFunction::scaled(0.5 + 2.0 * unit(rng), SamplingFunction::weierstrass(0.5));
  }
}

// det(E - h_{[0,k-1];theta}) by dense LU.
double dense_det(const SamplingFunction& f, double omega, double theta, double e, std::int64_t k) {
  if (k <= 0) return k == 0 ? 1.0 : 0.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m(i, i) = e - f(theta + static_cast<double>(i) * omega);
    if (i + 1 < k) m(i, i + 1) = m(i + 1, i) = -1.0;
  }
  return m.determinant();
}

Outcome c6_identity() {
  std::mt19937_64 rng(6);
  const double omega = golden_cf().value();
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto f = random_family(rng);
    const double theta = unit(rng);
    const double r = 2.0 + f.sup_norm();
    const double e = -r + 2.0 * r * unit(rng);
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 30);
    const Mat2 a = iterate(f, omega, e, theta, k).to_mat();
    const Mat2 claimed{dense_det(f, omega, theta, e, k), -dense_det(f, omega, theta + omega, e, k - 1),
                       dense_det(f, omega, theta, e, k - 1),
                       -dense_det(f, omega, theta + omega, e, k - 2)};
    worst = std::max(worst, (a - claimed).max_abs() / std::max(1.0, a.max_abs()));
    const double p = det_truncated(f, omega, theta, e, k);
    worst = std::max(worst, std::abs(p - claimed.m11) / std::max(1.0, std::abs(claimed.m11)));
  }
  return {worst <= kIdentityTol, "max relative residual=" + fmt("%.3e", worst)};
}

Outcome c7_green() {
  std::mt19937_64 rng(7);
  const double omega = golden_cf().value();
  double worst_inv = 0.0, worst_eig = 0.0, worst_poisson = 0.0;
  int done = 0, skipped = 0;
  while (done < 500) {
    const auto f = random_family(rng);
    const double theta = unit(rng);
    const double r = 2.0 + f.sup_norm();
    const double e = -r + 2.0 * r * unit(rng);
    const std::int64_t u = static_cast<std::int64_t>(rng() % 21) - 10;
    const std::int64_t len = 1 + static_cast<std::int64_t>(rng() % 12);
    const std::int64_t v = u + len - 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(len, len);
    for (Eigen::Index i = 0; i < len; ++i) {
      m(i, i) = f(theta + static_cast<double>(u + i) * omega) - e;
      if (i + 1 < len) m(i, i + 1) = m(i + 1, i) = 1.0;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-6) {
      ++skipped;  // singular restriction: E too close to an eigenvalue
      continue;
    }
    const Eigen::MatrixXd inv = m.inverse();
    const Eigen::MatrixXd eig =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const double scale = std::max(1.0, inv.cwiseAbs().maxCoeff());
    Eigen::MatrixXd g(len, len);
    for (std::int64_t i = u; i <= v; ++i) {
      for (std::int64_t j = u; j <= v; ++j) {
        g(i - u, j - u) = green_restricted(f, omega, theta, e, u, v, i, j, 1e300);
        worst_inv = std::max(worst_inv, std::abs(g(i - u, j - u) - inv(i - u, j - u)) / scale);
        worst_eig = std::max(worst_eig, std::abs(g(i - u, j - u) - eig(i - u, j - u)) / scale);
      }
    }
    // formal eigenfunction from psi(u-1) = 1, psi(u-2) = 0.3:
    // psi(x) = -G(x,u) psi(u-1) - G(x,v) psi(v+1) on [u, v]
    std::vector<double> psi(static_cast<std::size_t>(len + 3));
    psi[0] = 0.3;
    psi[1] = 1.0;
    for (std::int64_t n = u - 1; n <= v; ++n) {
      const auto s = static_cast<std::size_t>(n - u + 2);
      psi[s + 1] = (e - f(theta + static_cast<double>(n) * omega)) * psi[s] - psi[s - 1];
    }
    const double psi_scale = std::max(1.0, Eigen::Map<Eigen::VectorXd>(psi.data(), psi.size()).cwiseAbs().maxCoeff());
    for (std::int64_t x = u; x <= v; ++x) {
      const double rhs = -g(x - u, 0) * psi[1] - g(x - u, len - 1) * psi[static_cast<std::size_t>(len + 2)];
      worst_poisson = std::max(worst_poisson, std::abs(psi[static_cast<std::size_t>(x - u + 2)] - rhs) /
                                                  (psi_scale * scale));
    }
    ++done;
  }
  const double worst = std::max({worst_inv, worst_eig, worst_poisson});
  return {worst <= kGreenTol, "inverse=" + fmt("%.2e", worst_inv) + " eigensolve=" + fmt("%.2e", worst_eig) +
                                  " eigenfunction=" + fmt("%.2e", worst_poisson) +
                                  " (skipped " + std::to_string(skipped) + " singular)"};
}

Outcome c8_return_time() {
  std::mt19937_64 rng(8);
  int bad_bound = 0, bad_oracle = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::int64_t> quotients;
    for (int i = 0; i < 10; ++i) quotients.push_back(1 + static_cast<std::int64_t>(rng() % 5));
    const auto cf = ContinuedFraction::from_quotients(quotients);
    const auto list = approximants(cf);
    const std::size_t n = 1 + rng() % (list.size() - 1);
    const auto& a = list[n];
    const auto prev = previous_denominator(list, n);
    const double len = (1.0 + 1e-3 + (1.0 - 2e-3) * unit(rng)) / static_cast<double>(a.q);
    const double l = unit(rng);
    const double theta = unit(rng);
    const auto j = orbit_hits_interval(theta, cf.value(), a, prev, {l, l + len});
    std::int64_t first = -1;
    for (std::int64_t s = 0; s <= a.q + prev; ++s) {
      if (frac(theta + static_cast<double>(s) * cf.value() - l) <= len) {
        first = s;
        break;
      }
    }
    bad_bound += j > a.q + prev - 1 ? 1 : 0;
    bad_oracle += j != first ? 1 : 0;
  }
  return {bad_bound == 0 && bad_oracle == 0,
          "bound violations=" + std::to_string(bad_bound) + " oracle mismatches=" + std::to_string(bad_oracle)};
}

Outcome c9_fejer() {
  const auto w = SamplingFunction::weierstrass(0.5);
  std::vector<double> xs, ys;
  for (int n = 8; n <= 1024; n *= 2) {
    xs.push_back(std::log(n));
    ys.push_back(std::log(sup_distance(w, SamplingFunction::trig(fejer_smooth(w, n)), 1 << 14)));
  }
  const double slope = ls_slope(xs, ys);
  return {std::abs(slope - kFejerSlope) <= kFejerSlopeTol, "slope=" + fmt("%.4f", slope)};
}

Outcome c10a_holder_rough() {
  const auto f = SamplingFunction::scaled(5.0, SamplingFunction::weierstrass(0.5));
  const auto fit = holder_fit(golden_cf(), consecutive_pairs(golden_range(5, 233)),
                              direct_provider(f, accept_opts()));
  return {fit.beta_hat >= kHolderA, "beta_hat=" + fmt("%.4f", fit.beta_hat) +
                                        " pairs used=" + std::to_string(std::count_if(
                                            fit.pairs.begin(), fit.pairs.end(),
                                            [](const HolderPair& p) { return p.used; }))};
}

LPlusRecord lplus_cos3() {
  return l_plus_set(SamplingFunction::cosine(3.0), golden_cf(), 0.5);
}

Outcome c10b_holder_lplus(const SpectrumProvider& spectra, const LPlusRecord& lp) {
  const auto fit = holder_fit(golden_cf(), consecutive_pairs(golden_range(5, 233)), spectra, lp);
  return {fit.beta_hat >= kHolderB, "beta_hat=" + fmt("%.4f", fit.beta_hat) +
                                        " L+ measure=" + fmt("%.4f", lp.set.measure())};
}

Outcome c11_setwise(const SpectrumProvider& spectra, const LPlusRecord& lp) {
  const auto t = convergence_table(golden_cf(), golden_range(8, 233), spectra, lp);
  std::string gaps;
  bool mono = true;
  double prev = 1e300;
  for (const auto& row : t.rows) {
    if (row.approximant.q > 89) continue;
    gaps += (gaps.empty() ? "" : ",") + fmt("%.4g", row.gap_deepest_lplus);
    mono = mono && row.gap_deepest_lplus <= prev;
    prev = row.gap_deepest_lplus;
  }
  return {mono, "setwise gaps q=8..89: " + gaps};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c12_determinism() {
  const fs::path root = fs::temp_directory_path() / ("quasispec-accept-" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<json> runs = {
      {{"kind", "measure-convergence"}, {"sampling", {{"kind", "cosine"}, {"lambda", 2.0}}}, {"e_res", kAcceptEres}},
      {{"kind", "lyapunov"}, {"sampling", {{"kind", "cosine"}, {"lambda", 3.0}}}, {"k", 2000}, {"m_theta", 2000}},
      {{"kind", "holder-fit"}, {"sampling", {{"kind", "cosine"}, {"lambda", 3.0}}}, {"q_min", 5}, {"q_max", 89},
       {"use_l_plus", true}},
      {{"kind", "furman-check"}, {"sampling", {{"kind", "cosine"}, {"lambda", 3.0}}}, {"k", 500}, {"m_theta", 500}},
      {{"kind", "perturbation-check"}, {"sampling", {{"kind", "cosine"}, {"lambda", 3.0}}}, {"k", 300},
       {"m_theta", 200}},
  };
  int compared = 0, differing = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::vector<std::vector<fs::path>> outs;
    for (unsigned w : {1u, 8u}) {
      json j = ExperimentConfig{}.to_json();
      j.update(runs[r]);
      j["workers"] = w;
      j["cache_dir"] = "";
      j["out"] = (root / (std::to_string(r) + "-w" + std::to_string(w))).string();
      outs.push_back(run(ExperimentConfig::from_json(j)).outputs);
    }
    for (std::size_t i = 0; i < outs[0].size(); ++i) {
      if (outs[0][i].filename() == "manifest.json") continue;  // carries wall time
      ++compared;
      differing += slurp(outs[0][i]) == slurp(outs[1][i]) ? 0 : 1;
    }
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " outputs compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("%-4s %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), dt);
    std::fflush(stdout);
  };

  report("C1", "Aubry-Andre measure limit", c1_aubry_andre);
  report("C2", "critical coupling decay", c2_critical);
  report("C3", "Lyapunov plateau", [] { return c3_plateau(0); });
  report("C4", "uniform upper bound", [] { return c4_furman(0); });
  report("C5", "perturbation bound", c5_perturbation);
  report("C6", "determinant/cocycle identity", c6_identity);
  report("C7", "Green's function identities", c7_green);
  report("C8", "return-time bound", c8_return_time);
  report("C9", "Fejer rate", c9_fejer);
  report("C10a", "Holder exponent, rough potential", c10a_holder_rough);

  // C10b and C11 share the cos(3) spectra and L+ set.
  std::map<std::int64_t, SpectrumRecord> memo;
  const auto direct = direct_provider(SamplingFunction::cosine(3.0), accept_opts());
  const SpectrumProvider cos3 = [&](const Approximant& a) {
    auto it = memo.find(a.q);
    if (it == memo.end()) it = memo.emplace(a.q, direct(a)).first;
    return it->second;
  };
  const auto lp = lplus_cos3();
  report("C10b", "Holder exponent on L+", [&] { return c10b_holder_lplus(cos3, lp); });
  report("C11", "setwise convergence", [&] { return c11_setwise(cos3, lp); });
  report("C12", "determinism across worker counts", c12_determinism);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
