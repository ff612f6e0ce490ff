#include "quasispec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quasispec/errors.hpp"
#include "quasispec/numfmt.hpp"
#include "quasispec/parallel.hpp"
#include "quasispec/rotation_cf.hpp"
#include "quasispec/summation.hpp"

namespace quasispec {

// ------------------------------------------------------------------ Mat2/LogMat

double Mat2::norm() const {
  // sigma_max = (|(a+d, b-c)| + |(a-d, b+c)|) / 2
  return 0.5 * (std::hypot(m11 + m22, m12 - m21) + std::hypot(m11 - m22, m12 + m21));
}

double Mat2::max_abs() const {
  return std::max(std::max(std::abs(m11), std::abs(m12)), std::max(std::abs(m21), std::abs(m22)));
}

void LogMat::left_multiply(const Mat2& a) {
  mat = a * mat;
  renormalize();
}

void LogMat::renormalize() {
  const double n = mat.norm();
  if (n >= 0.5 && n <= 2.0) return;
  if (n == 0.0 || !std::isfinite(n)) return;
  mat = mat.scaled(1.0 / n);
  log_scale += std::log(n);
}

double LogMat::log_norm() const { return log_scale + std::log(mat.norm()); }

Mat2 LogMat::to_mat() const { return mat.scaled(std::exp(log_scale)); }

double log_norm_difference(const LogMat& a, const LogMat& b) {
  const double s = std::max(a.log_scale, b.log_scale);
  const Mat2 diff = a.mat.scaled(std::exp(a.log_scale - s)) - b.mat.scaled(std::exp(b.log_scale - s));
  const double n = diff.norm();
  if (n == 0.0) return -std::numeric_limits<double>::infinity();
  return s + std::log(n);
}

Mat2 transfer_matrix(const SamplingFunction& f, double energy, double theta) {
  return {energy - f(theta), -1.0, 1.0, 0.0};
}

LogMat iterate(const SamplingFunction& f, double omega, double energy, double theta,
               std::int64_t k) {
  if (k < 0) {
    const std::int64_t n = -k;
    return iterate(f, omega, energy, theta - static_cast<double>(n) * omega, n).sl2_inverse();
  }
  LogMat acc;
  for (std::int64_t i = 0; i < k; ++i) {
    acc.left_multiply(transfer_matrix(f, energy, theta + static_cast<double>(i) * omega));
  }
  return acc;
}

// ------------------------------------------------------------------ theta grids

double ThetaGrid::at(std::int64_t j, double omega) const {
  if (mode == ThetaSampling::kUniform) return static_cast<double>(j) / static_cast<double>(count);
  return frac(theta0 + static_cast<double>(j) * omega);
}

std::string to_string(ThetaSampling mode) {
  return mode == ThetaSampling::kUniform ? "uniform" : "orbit";
}

ThetaSampling theta_sampling_from_string(const std::string& s) {
  if (s == "uniform") return ThetaSampling::kUniform;
  if (s == "orbit") return ThetaSampling::kOrbit;
  throw PreconditionError("theta sampling must be \"uniform\" or \"orbit\", got \"" + s + "\"");
}

// ---------------------------------------------------------------------- kernels

namespace {

constexpr std::size_t kLanes = 64;

// Steps between power-of-two rescalings so that no entry can exceed 2^900:
// one step multiplies the largest entry by at most 1 + |E - v|.
std::size_t rescale_interval(std::span<const double> potential, std::span<const double> energies) {
  double vmax = 0.0, emax = 0.0;
  for (double v : potential) vmax = std::max(vmax, std::abs(v));
  for (double e : energies) emax = std::max(emax, std::abs(e));
  const double growth = std::log2(2.0 + vmax + emax);
  const double steps = std::floor(900.0 / growth);
  return static_cast<std::size_t>(std::clamp(steps, 1.0, 256.0));
}

// Runs the product for up to kLanes energies at once. Rescaling is by exact
// powers of two, so the scaled state is bit-identical to the unscaled
// product whenever the latter is representable.
template <class Finish>
void run_lanes(std::span<const double> potential, std::span<const double> energies,
               std::span<double> out, Finish finish) {
  const std::size_t interval = rescale_interval(potential, energies);
  const std::size_t steps = potential.size();
  alignas(64) double a[kLanes], b[kLanes], c[kLanes], d[kLanes], en[kLanes];
  int ex[kLanes];
  for (std::size_t base = 0; base < energies.size(); base += kLanes) {
    const std::size_t lanes = std::min(kLanes, energies.size() - base);
    for (std::size_t l = 0; l < lanes; ++l) {
      a[l] = 1.0;
      b[l] = 0.0;
      c[l] = 0.0;
      d[l] = 1.0;
      ex[l] = 0;
      en[l] = energies[base + l];
    }
    std::size_t s = 0;
    while (s < steps) {
      const std::size_t stop = std::min(steps, s + interval);
      for (; s < stop; ++s) {
        const double v = potential[s];
        for (std::size_t l = 0; l < lanes; ++l) {
          const double x = en[l] - v;
          const double na = x * a[l] - c[l];
          const double nb = x * b[l] - d[l];
          c[l] = a[l];
          d[l] = b[l];
          a[l] = na;
          b[l] = nb;
        }
      }
      for (std::size_t l = 0; l < lanes; ++l) {
        const double m = std::max(std::max(std::abs(a[l]), std::abs(b[l])),
                                  std::max(std::abs(c[l]), std::abs(d[l])));
        if (m == 0.0 || !std::isfinite(m)) continue;
        int e = 0;
        std::frexp(m, &e);
        a[l] = std::ldexp(a[l], -e);
        b[l] = std::ldexp(b[l], -e);
        c[l] = std::ldexp(c[l], -e);
        d[l] = std::ldexp(d[l], -e);
        ex[l] += e;
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      out[base + l] = finish(Mat2{a[l], b[l], c[l], d[l]}, ex[l]);
    }
  }
}

}  // namespace

void log_norm_kernel(std::span<const double> potential, std::span<const double> energies,
                     std::span<double> out) {
  run_lanes(potential, energies, out, [](const Mat2& m, int e) {
    return std::log(m.norm()) + static_cast<double>(e) * std::numbers::ln2;
  });
}

void trace_kernel(std::span<const double> potential, std::span<const double> energies,
                  std::span<double> out) {
  run_lanes(potential, energies, out, [](const Mat2& m, int e) { return std::ldexp(m.trace(), e); });
}

void scan_log_norms(const SamplingFunction& f, double omega, std::span<const double> energies,
                    std::int64_t k, const ThetaGrid& grid, unsigned workers,
                    const std::function<void(std::int64_t, std::span<const double>)>& visit) {
  if (k < 0) throw PreconditionError("scan_log_norms: k must be >= 0");
  if (grid.count < 1) throw PreconditionError("scan_log_norms: theta grid must be nonempty");
  const std::int64_t m = grid.count;
  const std::size_t ne = energies.size();

  std::vector<double> orbit;
  if (grid.mode == ThetaSampling::kOrbit && k > 0) {
    orbit.resize(static_cast<std::size_t>(m + k - 1));
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      orbit[i] = f(grid.theta0 + static_cast<double>(i) * omega);
    }
  }

  constexpr std::int64_t kBlock = 64;
  std::vector<double> rows(static_cast<std::size_t>(std::min(kBlock, m)) * ne);
  for (std::int64_t start = 0; start < m; start += kBlock) {
    const std::int64_t nb = std::min(kBlock, m - start);
    parallel_for(static_cast<std::size_t>(nb), workers, [&](std::size_t i) {
      const std::int64_t j = start + static_cast<std::int64_t>(i);
      std::span<double> row(rows.data() + i * ne, ne);
      if (k == 0) {
        std::fill(row.begin(), row.end(), 0.0);
        return;
      }
      if (grid.mode == ThetaSampling::kOrbit) {
        log_norm_kernel(std::span<const double>(orbit.data() + j, static_cast<std::size_t>(k)),
                        energies, row);
      } else {
        std::vector<double> pot(static_cast<std::size_t>(k));
        const double theta = grid.at(j, omega);
        for (std::int64_t s = 0; s < k; ++s) pot[s] = f(theta + static_cast<double>(s) * omega);
        log_norm_kernel(pot, energies, row);
      }
    });
    for (std::int64_t i = 0; i < nb; ++i) {
      visit(start + i, std::span<const double>(rows.data() + i * ne, ne));
    }
  }
}

// -------------------------------------------------------------------- Lyapunov

std::string LyapunovProfile::to_csv() const {
  std::string out = "E,L_est,sup_theta,k\n";
  for (std::size_t i = 0; i < energies.size(); ++i) {
    out += fmt17(energies[i]) + "," + fmt17(values[i]) + "," + fmt17(sup_over_theta[i]) + "," +
           std::to_string(k) + "\n";
  }
  return out;
}

LyapunovProfile lyapunov_profile(const SamplingFunction& f, double omega,
                                 std::span<const double> energies, std::int64_t k,
                                 const ThetaGrid& grid, unsigned workers) {
  if (k < 1) throw PreconditionError("lyapunov_profile: k must be >= 1");
  const std::size_t ne = energies.size();
  std::vector<CompensatedSum> sums(ne);
  std::vector<double> sup(ne, -std::numeric_limits<double>::infinity());
  scan_log_norms(f, omega, energies, k, grid, workers,
                 [&](std::int64_t, std::span<const double> row) {
                   for (std::size_t e = 0; e < ne; ++e) {
                     sums[e].add(row[e]);
                     sup[e] = std::max(sup[e], row[e]);
                   }
                 });
  LyapunovProfile p;
  p.energies.assign(energies.begin(), energies.end());
  p.k = k;
  p.theta_samples = grid.count;
  p.sampling = grid.mode;
  const double kd = static_cast<double>(k);
  for (std::size_t e = 0; e < ne; ++e) {
    p.values.push_back(sums[e].value() / static_cast<double>(grid.count) / kd);
    p.sup_over_theta.push_back(sup[e] / kd);
  }
  return p;
}

double lyapunov_estimate(const SamplingFunction& f, double omega, double energy, std::int64_t k,
                         const ThetaGrid& grid) {
  const double e[1] = {energy};
  return lyapunov_profile(f, omega, e, k, grid, 1).values[0];
}

UpperCheck uniform_upper_check(const SamplingFunction& f, double omega, double energy,
                               std::int64_t k, const ThetaGrid& grid) {
  const double e[1] = {energy};
  const auto p = lyapunov_profile(f, omega, e, k, grid, 1);
  return {p.sup_over_theta[0], p.values[0]};
}

double level_set_measure(const SamplingFunction& f, double omega, double energy, double t,
                         std::int64_t k, const ThetaGrid& grid) {
  if (k < 1) throw PreconditionError("level_set_measure: k must be >= 1");
  const double e[1] = {energy};
  std::int64_t hits = 0;
  const double kd = static_cast<double>(k);
  scan_log_norms(f, omega, e, k, grid, 1, [&](std::int64_t, std::span<const double> row) {
    if (row[0] / kd > t) ++hits;
  });
  return static_cast<double>(hits) / static_cast<double>(grid.count);
}

// ----------------------------------------------------------------- perturbation

double PerturbationResult::err() const { return std::exp(log_err); }
double PerturbationResult::bound() const { return std::exp(log_bound); }

std::vector<PerturbationResult> perturbation_profile(const SamplingFunction& f, double omega,
                                                     double energy, const Perturbation& pert,
                                                     std::int64_t k_max, double epsilon,
                                                     const ThetaGrid& grid) {
  if (k_max < 1) throw PreconditionError("perturbation_profile: k must be >= 1");
  if (grid.count < 1) throw PreconditionError("perturbation_profile: empty theta grid");

  const bool fejer = pert.kind == Perturbation::Kind::kFejer;
  SamplingFunction replacement = f;
  double delta0 = std::abs(pert.delta);
  if (fejer) {
    if (pert.fejer_n < 0) throw PreconditionError("perturbation_profile: Fejer N must be >= 0");
    replacement = SamplingFunction::trig(fejer_smooth(f, pert.fejer_n));
    delta0 = sup_distance(f, replacement, 1 << 16);
  }
  const double shifted_energy = fejer ? energy : energy + pert.delta;

  const auto n = static_cast<std::size_t>(k_max);
  std::vector<CompensatedSum> log_norms(n);
  std::vector<double> max_log_diff(n, -std::numeric_limits<double>::infinity());
  for (std::int64_t j = 0; j < grid.count; ++j) {
    const double theta = grid.at(j, omega);
    LogMat a, d;
    for (std::size_t s = 0; s < n; ++s) {
      const double x = theta + static_cast<double>(s) * omega;
      const double va = f(x);
      const double vd = fejer ? replacement(x) : va;
      if (fejer) delta0 = std::max(delta0, std::abs(va - vd));
      a.left_multiply({energy - va, -1.0, 1.0, 0.0});
      d.left_multiply({shifted_energy - vd, -1.0, 1.0, 0.0});
      log_norms[s].add(a.log_norm());
      max_log_diff[s] = std::max(max_log_diff[s], log_norm_difference(a, d));
    }
  }

  std::vector<PerturbationResult> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    PerturbationResult r;
    r.k = static_cast<std::int64_t>(s + 1);
    r.delta0 = delta0;
    r.epsilon = epsilon;
    r.lyapunov = log_norms[s].value() / static_cast<double>(grid.count) / static_cast<double>(r.k);
    r.log_err = max_log_diff[s];
    r.log_bound = std::log(delta0) + static_cast<double>(r.k) * (r.lyapunov + epsilon);
    out.push_back(r);
  }
  return out;
}

PerturbationResult perturbation_error(const SamplingFunction& f, double omega, double energy,
                                      const Perturbation& pert, std::int64_t k, double epsilon,
                                      const ThetaGrid& grid) {
  return perturbation_profile(f, omega, energy, pert, k, epsilon, grid).back();
}

// ------------------------------------------------------ determinants and Green

double det_truncated(const SamplingFunction& f, double omega, double theta, double energy,
                     std::int64_t k) {
  if (k < 0) throw PreconditionError("det_truncated: k must be >= 0");
  double prev = 0.0;  // P_{-1}
  double cur = 1.0;   // P_0
  for (std::int64_t j = 1; j <= k; ++j) {
    const double next = (energy - f(theta + static_cast<double>(j - 1) * omega)) * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double green_restricted(const SamplingFunction& f, double omega, double theta, double energy,
                        std::int64_t u, std::int64_t v, std::int64_t i, std::int64_t j,
                        double max_condition) {
  if (u > v || i < u || i > v || j < u || j > v) {
    throw PreconditionError("green_restricted: need u <= i, j <= v");
  }
  const auto n = static_cast<std::size_t>(v - u + 1);
  std::vector<double> diag(n);
  for (std::size_t t = 0; t < n; ++t) {
    diag[t] = f(theta + static_cast<double>(u + static_cast<std::int64_t>(t)) * omega) - energy;
  }
  // lead[t] = det of the leading t x t block of h - E, tail[t] = det of the
  // block on local sites t..n-1.
  std::vector<double> lead(n + 1), tail(n + 1);
  lead[0] = 1.0;
  lead[1] = diag[0];
  for (std::size_t t = 1; t < n; ++t) lead[t + 1] = diag[t] * lead[t] - lead[t - 1];
  tail[n] = 1.0;
  tail[n - 1] = diag[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) tail[t] = diag[t] * tail[t + 1] - tail[t + 2];

  const std::string where = "[" + std::to_string(u) + ", " + std::to_string(v) + "]";
  const double full = lead[n];
  if (full == 0.0 || !std::isfinite(full)) {
    throw NumericalError("green_restricted: restriction to " + where + " is singular at E");
  }
  auto entry = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
    return sign * lead[a] * tail[b + 1] / full;
  };
  double norm_m = 0.0, norm_g = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double offdiag = (r > 0 ? 1.0 : 0.0) + (r + 1 < n ? 1.0 : 0.0);
    norm_m = std::max(norm_m, std::abs(diag[r]) + offdiag);
    double row = 0.0;
    for (std::size_t c = 0; c < n; ++c) row += std::abs(entry(r, c));
    norm_g = std::max(norm_g, row);
  }
  const double cond = norm_m * norm_g;
  if (!(cond <= max_condition)) {
    throw NumericalError("green_restricted: restriction to " + where +
                         " is near-singular (condition estimate " + fmt17(cond) + ")");
  }
  return entry(static_cast<std::size_t>(i - u), static_cast<std::size_t>(j - u));
}

CramerFactors cramer_factors(const SamplingFunction& f, double omega, double theta,
                             double energy, std::int64_t u, std::int64_t v, std::int64_t i,
                             std::int64_t j) {
  if (u > v || i < u || i > v || j < u || j > v) {
    throw PreconditionError("cramer_factors: need u <= i, j <= v");
  }
  const std::int64_t lo = std::min(i, j);
  const std::int64_t hi = std::max(i, j);
  const double start = theta + static_cast<double>(u) * omega;
  CramerFactors c;
  c.left = det_truncated(f, omega, start, energy, lo - u);
  c.right = det_truncated(f, omega, theta + static_cast<double>(hi + 1) * omega, energy, v - hi);
  c.full = det_truncated(f, omega, start, energy, v - u + 1);
  return c;
}

double cocycle_det_identity_check(const SamplingFunction& f, double omega, double theta,
                                  double energy, std::int64_t k) {
  if (k < 1) throw PreconditionError("cocycle_det_identity_check: k must be >= 1");
  const Mat2 a = iterate(f, omega, energy, theta, k).to_mat();
  const double next = theta + omega;
  const Mat2 claimed{det_truncated(f, omega, theta, energy, k),
                     -det_truncated(f, omega, next, energy, k - 1),
                     det_truncated(f, omega, theta, energy, k - 1),
                     k >= 2 ? -det_truncated(f, omega, next, energy, k - 2) : 0.0};
  return (a - claimed).max_abs() / std::max(1.0, a.max_abs());
}

// ------------------------------------------------------------------- helpers

std::pair<double, double> energy_window(const SamplingFunction& f) {
  const double r = 2.0 + f.sup_norm();
  return {-r, r};
}

std::vector<double> linspace(double lo, double hi, std::int64_t count) {
  if (count < 1) throw PreconditionError("linspace: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::int64_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace quasispec
