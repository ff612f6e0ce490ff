#include "quasispec/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

#include "quasispec/errors.hpp"
#include "quasispec/numfmt.hpp"
#include "quasispec/parallel.hpp"

namespace quasispec {

namespace {

void check_pq(const Approximant& pq) {
  if (pq.q < 1) throw PreconditionError("denominator q must be >= 1");
}

// v_i = f(theta + i p/q) with the offset reduced exactly mod 1.
std::vector<double> period_potential(const SamplingFunction& f, const Approximant& pq,
                                     double theta) {
  std::vector<double> v(static_cast<std::size_t>(pq.q));
  const std::int64_t p = ((pq.p % pq.q) + pq.q) % pq.q;
  for (std::int64_t i = 0; i < pq.q; ++i) {
    const auto r = static_cast<std::int64_t>((static_cast<__int128>(i) * p) % pq.q);
    v[i] = f(theta + static_cast<double>(r) / static_cast<double>(pq.q));
  }
  return v;
}

double trace_at(std::span<const double> potential, double energy) {
  const double e[1] = {energy};
  double out[1];
  trace_kernel(potential, e, out);
  return out[0];
}

// Distance of [lo, hi] from [-2, 2]; <= 0 iff they meet.
double band_gap(double lo, double hi) { return std::max(lo - 2.0, -2.0 - hi); }

// Discriminant sampled on theta_j = j / T, j = 0..T/q - 1 (one period).
class PeriodScan {
 public:
  PeriodScan(const SamplingFunction& f, const Approximant& pq, std::int64_t theta_grid,
             bool refine)
      : f_(f), pq_(pq), total_(theta_grid), refine_(refine) {
    per_period_ = theta_grid / pq.q;
    rows_.reserve(static_cast<std::size_t>(per_period_));
    for (std::int64_t j = 0; j < per_period_; ++j) rows_.push_back(period_potential(f, pq, theta(j)));
  }

  struct Extremes {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::int64_t argmin = 0;
    std::int64_t argmax = 0;
  };

  double theta(std::int64_t j) const {
    return static_cast<double>(j) / static_cast<double>(total_);
  }

  void extremes(std::span<const double> energies, std::span<Extremes> out) const {
    std::vector<double> buf(energies.size());
    for (std::int64_t j = 0; j < per_period_; ++j) {
      trace_kernel(rows_[j], energies, buf);
      for (std::size_t e = 0; e < energies.size(); ++e) {
        if (buf[e] < out[e].min) {
          out[e].min = buf[e];
          out[e].argmin = j;
        }
        if (buf[e] > out[e].max) {
          out[e].max = buf[e];
          out[e].argmax = j;
        }
      }
    }
  }

  // Decides membership of one energy given its grid extremes.
  bool inside(double energy, const Extremes& x) const {
    const double g = band_gap(x.min, x.max);
    if (g <= 0.0) return true;
    if (!refine_) return false;
    // Only one side can be active: min > 2 or max < -2.
    const bool low = x.min - 2.0 > 0.0;
    const std::int64_t j = low ? x.argmin : x.argmax;
    const double sign = low ? 1.0 : -1.0;  // minimise sign * Delta
    const double center = sign * (low ? x.min : x.max);
    const double left = sign * row_trace((j + per_period_ - 1) % per_period_, energy);
    const double right = sign * row_trace((j + 1) % per_period_, energy);
    const double variation = std::max(std::abs(left - center), std::abs(right - center));
    if (!(g <= variation)) return false;
    const double best = golden_min(energy, theta(j - 1), theta(j + 1), sign);
    const double refined = std::min(center, best);
    return low ? refined - 2.0 <= 0.0 : -2.0 + refined <= 0.0;
  }

  // band_gap of the grid extremes, without refinement.
  double gap_value(double energy) const {
    Extremes x;
    const double e[1] = {energy};
    extremes(e, std::span<Extremes>(&x, 1));
    return band_gap(x.min, x.max);
  }

  bool inside(double energy) const {
    Extremes x;
    const double e[1] = {energy};
    extremes(e, std::span<Extremes>(&x, 1));
    return inside(energy, x);
  }

 private:
  double row_trace(std::int64_t j, double energy) const { return trace_at(rows_[j], energy); }

  double trace_theta(double th, double energy) const {
    return trace_at(period_potential(f_, pq_, th), energy);
  }

  double golden_min(double energy, double a, double b, double sign) const {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = sign * trace_theta(c, energy);
    double fd = sign * trace_theta(d, energy);
    double best = std::min(fc, fd);
    for (int it = 0; it < 48; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = sign * trace_theta(c, energy);
        best = std::min(best, fc);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = sign * trace_theta(d, energy);
        best = std::min(best, fd);
      }
    }
    return best;
  }

  const SamplingFunction& f_;
  Approximant pq_;
  std::int64_t total_ = 0;
  std::int64_t per_period_ = 0;
  bool refine_ = false;
  std::vector<std::vector<double>> rows_;
};

// Band edges of the theta = 0 operator: its periodic and antiperiodic
// eigenvalues, sorted together, pair up as [e_0, e_1], [e_2, e_3], ...
std::vector<double> theta0_band_edges(const SamplingFunction& f, const Approximant& pq) {
  auto all = floquet_eigenvalues(f, pq, 0.0, 0.0);
  const auto anti = floquet_eigenvalues(f, pq, 0.0, std::numbers::pi);
  all.insert(all.end(), anti.begin(), anti.end());
  std::sort(all.begin(), all.end());
  return all;
}

// Maximiser of g over (a, b) by golden section. A gap of the union
// spectrum lies inside a gap of every single-phase spectrum, so probing the
// theta = 0 gaps finds union gaps narrower than the scan spacing.
double golden_max(const std::function<double(double)>& g, double a, double b) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  return gc > gd ? c : d;
}

}  // namespace

double discriminant(const SamplingFunction& f, const Approximant& pq, double energy,
                    double theta) {
  check_pq(pq);
  return trace_at(period_potential(f, pq, theta), energy);
}

std::vector<double> floquet_eigenvalues(const SamplingFunction& f, const Approximant& pq,
                                        double theta, double bloch_phase) {
  check_pq(pq);
  const auto q = static_cast<Eigen::Index>(pq.q);
  const auto v = period_potential(f, pq, theta);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) h(i, i) = v[i];
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    h(i, i + 1) += 1.0;
    h(i + 1, i) += 1.0;
  }
  const std::complex<double> phase = std::polar(1.0, bloch_phase);
  h(q - 1, 0) += phase;
  h(0, q - 1) += std::conj(phase);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("floquet_eigenvalues: eigensolver failed");
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + q);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t effective_theta_grid(const SamplingFunction& f, std::int64_t q,
                                  std::int64_t requested) {
  if (q < 1) throw PreconditionError("effective_theta_grid: q must be >= 1");
  if (requested < 0) throw PreconditionError("theta_grid must be >= 1");
  std::int64_t t = requested;
  if (t == 0) {
    const auto degree = f.fourier_degree();
    t = degree ? 8 * q * (1 + *degree) : std::max<std::int64_t>(4096, 64 * q);
  }
  return (t + q - 1) / q * q;
}

nlohmann::json SpectrumRecord::to_json() const {
  return {{"p", frequency.p},           {"q", frequency.q},
          {"bands", bands.to_json()},   {"e_res", e_resolution},
          {"theta_grid", theta_grid},   {"refined", refined}};
}

SpectrumRecord SpectrumRecord::from_json(const nlohmann::json& j) {
  SpectrumRecord r;
  r.frequency.p = j.at("p").get<std::int64_t>();
  r.frequency.q = j.at("q").get<std::int64_t>();
  r.bands = IntervalSet::from_json(j.at("bands"));
  r.e_resolution = j.at("e_res").get<double>();
  r.theta_grid = j.at("theta_grid").get<std::int64_t>();
  r.refined = j.value("refined", false);
  return r;
}

SpectrumRecord spectrum_rational(const SamplingFunction& f, const Approximant& pq,
                                 const SpectrumOptions& opts) {
  check_pq(pq);
  if (!(opts.e_res > 0.0)) throw PreconditionError("spectrum_rational: e_res must be > 0");
  const std::int64_t grid = effective_theta_grid(f, pq.q, opts.theta_grid);
  // Cosine discriminants peak at q theta in {0, 1/2}: on the grid when T/q is even.
  const bool refine = !(f.is_cosine_family() && (grid / pq.q) % 2 == 0);
  const PeriodScan scan(f, pq, grid, refine);

  const auto [lo, hi] = energy_window(f);
  const auto steps = static_cast<std::int64_t>(std::ceil((hi - lo) / opts.e_res));
  std::vector<double> energies = linspace(lo, hi, steps + 1);
  // Interior points of every theta = 0 band (always inside) and the most
  // open point of every theta = 0 gap.
  const auto edges = theta0_band_edges(f, pq);
  std::vector<double> seeds;
  for (std::size_t i = 0; i + 1 < edges.size(); i += 2) seeds.push_back(0.5 * (edges[i] + edges[i + 1]));
  std::vector<double> gap_probe(edges.size() / 2 > 0 ? edges.size() / 2 - 1 : 0);
  parallel_for(gap_probe.size(), opts.workers, [&](std::size_t j) {
    const double a = edges[2 * j + 1], b = edges[2 * j + 2];
    gap_probe[j] = b > a ? golden_max([&](double e) { return scan.gap_value(e); }, a, b) : a;
  });
  seeds.insert(seeds.end(), gap_probe.begin(), gap_probe.end());
  for (double s : seeds) {
    if (s > lo && s < hi) energies.push_back(s);
  }
  std::sort(energies.begin(), energies.end());
  energies.erase(std::unique(energies.begin(), energies.end()), energies.end());

  const std::size_t n = energies.size();
  std::vector<char> in(n, 0);
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, opts.workers, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t len = std::min(kChunk, n - begin);
    std::vector<PeriodScan::Extremes> ext(len);
    std::span<const double> es(energies.data() + begin, len);
    scan.extremes(es, ext);
    for (std::size_t i = 0; i < len; ++i) in[begin + i] = scan.inside(es[i], ext[i]) ? 1 : 0;
  });

  // Runs of consecutive inside points; edges are bisected against the
  // neighbouring outside points.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < n;) {
    if (!in[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && in[j + 1]) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }
  if (runs.empty()) {
    throw NumericalError("spectrum_rational: no band found for p/q = " + std::to_string(pq.p) +
                         "/" + std::to_string(pq.q));
  }

  auto bisect = [&](double inside_e, double outside_e) {
    while (std::abs(inside_e - outside_e) > SpectrumOptions::kEdgeTolerance) {
      const double mid = 0.5 * (inside_e + outside_e);
      if (scan.inside(mid)) {
        inside_e = mid;
      } else {
        outside_e = mid;
      }
    }
    return 0.5 * (inside_e + outside_e);
  };
  std::vector<Interval> bands(runs.size());
  parallel_for(runs.size(), opts.workers, [&](std::size_t r) {
    const auto [a, b] = runs[r];
    const double left = a == 0 ? energies[0] : bisect(energies[a], energies[a - 1]);
    const double right = b + 1 == n ? energies[n - 1] : bisect(energies[b], energies[b + 1]);
    bands[r] = {left, right};
  });

  SpectrumRecord rec;
  rec.frequency = pq;
  rec.bands = IntervalSet::normalize(std::move(bands));
  rec.e_resolution = opts.e_res;
  rec.theta_grid = grid;
  rec.refined = refine;
  return rec;
}

// ------------------------------------------------------------------------ L+

LPlusRecord l_plus_from_profile(const SamplingFunction& f, LyapunovProfile profile, double chi) {
  if (!(chi > 0.0)) throw PreconditionError("l_plus_set: chi must be > 0");
  const auto [lo, hi] = energy_window(f);
  const auto& es = profile.energies;
  double cell = 0.0;
  for (std::size_t i = 1; i < es.size(); ++i) cell = std::max(cell, es[i] - es[i - 1]);
  std::vector<Interval> raw;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (profile.values[i] > chi) {
      raw.push_back({std::max(lo, es[i] - cell), std::min(hi, es[i] + cell)});
    }
  }
  LPlusRecord rec;
  rec.chi = chi;
  rec.set = IntervalSet::normalize(std::move(raw), 0.0);
  rec.profile = std::move(profile);
  rec.cell = cell;
  return rec;
}

LPlusRecord l_plus_set(const SamplingFunction& f, const ContinuedFraction& omega_cf, double chi,
                       const LPlusOptions& opts) {
  if (!(chi > 0.0)) throw PreconditionError("l_plus_set: chi must be > 0");
  if (!(opts.e_res > 0.0)) throw PreconditionError("l_plus_set: e_res must be > 0");
  const auto [lo, hi] = energy_window(f);
  const auto steps = static_cast<std::int64_t>(std::ceil((hi - lo) / opts.e_res));
  const auto energies = linspace(lo, hi, steps + 1);
  const ThetaGrid grid{opts.sampling, opts.m_theta, 0.0};
  auto profile = lyapunov_profile(f, omega_cf.value(), energies, opts.k, grid, opts.workers);
  return l_plus_from_profile(f, std::move(profile), chi);
}

SpectrumProvider direct_provider(const SamplingFunction& f, const SpectrumOptions& opts) {
  return [f, opts](const Approximant& pq) { return spectrum_rational(f, pq, opts); };
}

// ------------------------------------------------------------- comparisons

namespace {

void check_convergents(const ContinuedFraction& cf, const std::vector<Approximant>& list,
                       const char* who) {
  const auto known = approximants(cf);
  for (const auto& a : list) {
    const bool found = std::any_of(known.begin(), known.end(), [&](const Approximant& k) {
      return k.p == a.p && k.q == a.q;
    });
    if (!found) {
      throw PreconditionError(std::string(who) + ": " + std::to_string(a.p) + "/" +
                              std::to_string(a.q) + " is not a convergent of the frequency");
    }
  }
}

double one_sided_or_nan(const IntervalSet& a, const IntervalSet& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::quiet_NaN();
  return one_sided(a, b);
}

std::string csv_field(double x) { return std::isnan(x) ? std::string() : fmt17(x); }

}  // namespace

std::string ConvergenceTable::to_csv() const {
  std::string out =
      "n,p,q,bands,measure,measure_lplus,one_sided_next,one_sided_next_lplus,"
      "setwise_gap_deepest,setwise_gap_deepest_lplus\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool last = i + 1 == rows.size();
    out += std::to_string(r.approximant.index) + "," + std::to_string(r.approximant.p) + "," +
           std::to_string(r.approximant.q) + "," + std::to_string(r.bands) + "," +
           fmt17(r.measure) + "," + csv_field(has_lplus ? r.measure_lplus : nan) + "," +
           csv_field(last ? nan : r.one_sided_next) + "," +
           csv_field(has_lplus && !last ? r.one_sided_next_lplus : nan) + "," +
           fmt17(r.gap_deepest) + "," + csv_field(has_lplus ? r.gap_deepest_lplus : nan) + "\n";
  }
  return out;
}

ConvergenceTable convergence_table(const ContinuedFraction& omega_cf,
                                   const std::vector<Approximant>& approximant_range,
                                   const SpectrumProvider& spectra,
                                   const std::optional<LPlusRecord>& l_plus) {
  if (approximant_range.size() < 2) {
    throw PreconditionError("convergence_table: need at least two approximants");
  }
  check_convergents(omega_cf, approximant_range, "convergence_table");
  std::vector<IntervalSet> sets, restricted;
  for (const auto& a : approximant_range) {
    sets.push_back(spectra(a).bands);
    restricted.push_back(l_plus ? set_intersection(sets.back(), l_plus->set) : IntervalSet{});
  }
  ConvergenceTable table;
  table.has_lplus = l_plus.has_value();
  table.chi = l_plus ? l_plus->chi : 0.0;
  const std::size_t last = sets.size() - 1;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    ConvergenceRow row;
    row.approximant = approximant_range[i];
    row.bands = sets[i].size();
    row.measure = sets[i].measure();
    row.gap_deepest = setwise_gap(sets[i], sets[last]);
    if (i < last) row.one_sided_next = one_sided_or_nan(sets[i], sets[i + 1]);
    if (l_plus) {
      row.measure_lplus = restricted[i].measure();
      row.gap_deepest_lplus = setwise_gap(restricted[i], restricted[last]);
      if (i < last) row.one_sided_next_lplus = one_sided_or_nan(restricted[i], sets[i + 1]);
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string HolderFit::to_csv() const {
  std::string out = "p1,q1,p2,q2,scale,distance,used\n";
  for (const auto& r : pairs) {
    out += std::to_string(r.first.p) + "," + std::to_string(r.first.q) + "," +
           std::to_string(r.second.p) + "," + std::to_string(r.second.q) + "," + fmt17(r.scale) +
           "," + fmt17(r.distance) + "," + (r.used ? "1" : "0") + "\n";
  }
  return out;
}

HolderFit holder_fit(const ContinuedFraction& omega_cf,
                     const std::vector<std::pair<Approximant, Approximant>>& approximant_pairs,
                     const SpectrumProvider& spectra, const std::optional<LPlusRecord>& l_plus) {
  std::vector<Approximant> all;
  for (const auto& [a, b] : approximant_pairs) {
    all.push_back(a);
    all.push_back(b);
  }
  check_convergents(omega_cf, all, "holder_fit");

  std::map<std::pair<std::int64_t, std::int64_t>, IntervalSet> memo;
  auto bands_of = [&](const Approximant& a) -> const IntervalSet& {
    auto key = std::make_pair(a.p, a.q);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, spectra(a).bands).first;
    return it->second;
  };

  HolderFit fit;
  fit.use_l_plus = l_plus.has_value();
  std::vector<double> xs, ys;
  for (const auto& [a, b] : approximant_pairs) {
    HolderPair row{a, b};
    const auto num = static_cast<__int128>(a.p) * b.q - static_cast<__int128>(b.p) * a.q;
    row.scale = std::abs(static_cast<double>(num)) /
                (static_cast<double>(a.q) * static_cast<double>(b.q));
    IntervalSet first = bands_of(a);
    if (l_plus) first = set_intersection(first, l_plus->set);
    const IntervalSet& second = bands_of(b);
    row.distance = (first.empty() || second.empty()) ? 0.0 : one_sided(first, second);
    row.used = row.distance > 0.0 && row.scale > 0.0;
    if (row.used) {
      xs.push_back(std::log(row.scale));
      ys.push_back(std::log(row.distance));
    }
    fit.pairs.push_back(row);
  }
  if (xs.size() < 3) {
    throw NumericalError("holder_fit: " + std::to_string(xs.size()) +
                         " pairs with positive distance; need at least 3");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("holder_fit: all pairs share one scale");
  fit.beta_hat = sxy / sxx;
  fit.intercept = my - fit.beta_hat * mx;
  return fit;
}

std::vector<std::pair<Approximant, Approximant>> consecutive_pairs(
    const std::vector<Approximant>& list) {
  std::vector<std::pair<Approximant, Approximant>> out;
  for (std::size_t i = 0; i + 1 < list.size(); ++i) out.emplace_back(list[i], list[i + 1]);
  return out;
}

std::vector<Approximant> approximants_in_range(const ContinuedFraction& omega_cf,
                                               std::int64_t q_min, std::int64_t q_max) {
  std::vector<Approximant> out;
  for (const auto& a : approximants(omega_cf)) {
    if (a.q >= q_min && a.q <= q_max) out.push_back(a);
  }
  return out;
}

}  // namespace quasispec
