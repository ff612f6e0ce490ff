#include "quasispec/subadditive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "quasispec/cocycle.hpp"
#include "quasispec/errors.hpp"
#include "quasispec/numfmt.hpp"
#include "quasispec/parallel.hpp"
#include "quasispec/summation.hpp"

namespace quasispec {

namespace {

void check_grid(std::int64_t n, std::int64_t m_theta, const char* who) {
  if (n < 1) throw PreconditionError(std::string(who) + ": n must be >= 1");
  if (m_theta < 1) throw PreconditionError(std::string(who) + ": m_theta must be >= 1");
}

double grid_mean(const std::vector<double>& v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double grid_max(const std::vector<double>& v, std::size_t stride = 1) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); i += stride) m = std::max(m, v[i]);
  return m;
}

// Max of (1/n) f_n at full and at roughly half resolution. For even m the
// half grid is the even-indexed subset, so no extra evaluation is needed.
std::pair<double, double> sup_two_resolutions(const SubadditiveCocycle& f, std::int64_t n,
                                              std::int64_t m_theta, unsigned workers) {
  const auto values = f.sample(n, m_theta, workers);
  const double nd = static_cast<double>(n);
  const double full = grid_max(values) / nd;
  if (m_theta % 2 == 0) return {full, grid_max(values, 2) / nd};
  const std::int64_t half = std::max<std::int64_t>(1, m_theta / 2);
  return {full, grid_max(f.sample(n, half, workers)) / nd};
}

}  // namespace

SubadditiveCocycle::SubadditiveCocycle(Generator generator, double omega, std::string tag)
    : generator_(std::move(generator)), omega_(omega), tag_(std::move(tag)) {
  if (!generator_) throw PreconditionError("SubadditiveCocycle: empty generator");
}

std::vector<double> SubadditiveCocycle::sample(std::int64_t n, std::int64_t m_theta,
                                               unsigned workers) const {
  check_grid(n, m_theta, "sample");
  if (sampler_) return sampler_(n, m_theta, workers);
  std::vector<double> out(static_cast<std::size_t>(m_theta));
  parallel_for(out.size(), workers, [&](std::size_t j) {
    out[j] = generator_(n, static_cast<double>(j) / static_cast<double>(m_theta));
  });
  return out;
}

SubadditiveCocycle SubadditiveCocycle::schrodinger(const SamplingFunction& f, double omega,
                                                   double energy) {
  SubadditiveCocycle c(
      [f, omega, energy](std::int64_t n, double x) {
        return iterate(f, omega, energy, x, n).log_norm();
      },
      omega, "schrodinger E=" + fmt17(energy));
  c.sampler_ = [f, omega, energy](std::int64_t n, std::int64_t m_theta, unsigned workers) {
    std::vector<double> out(static_cast<std::size_t>(m_theta));
    const double e[1] = {energy};
    scan_log_norms(f, omega, e, n, ThetaGrid::uniform(m_theta), workers,
                   [&](std::int64_t j, std::span<const double> row) { out[j] = row[0]; });
    return out;
  };
  return c;
}

SubadditiveCocycle SubadditiveCocycle::additive(double c, double omega) {
  return SubadditiveCocycle(
      [c](std::int64_t n, double) { return static_cast<double>(n) * c; }, omega,
      "additive c=" + fmt17(c));
}

SubadditiveCocycle SubadditiveCocycle::birkhoff(const SamplingFunction& phi, double omega) {
  return SubadditiveCocycle(
      [phi, omega](std::int64_t n, double x) {
        CompensatedSum s;
        for (std::int64_t i = 0; i < n; ++i) s.add(phi(x + static_cast<double>(i) * omega));
        return s.value();
      },
      omega, "birkhoff");
}

SubadditiveCocycle SubadditiveCocycle::shifted(double c) const {
  SubadditiveCocycle out(
      [gen = generator_, c](std::int64_t n, double x) { return gen(n, x) + c; }, omega_,
      tag_ + " +" + fmt17(c));
  if (sampler_) {
    out.sampler_ = [s = sampler_, c](std::int64_t n, std::int64_t m, unsigned w) {
      auto v = s(n, m, w);
      for (double& x : v) x += c;
      return v;
    };
  }
  return out;
}

GammaDistance gamma_metric(const SubadditiveCocycle& f, const SubadditiveCocycle& g,
                           std::int64_t n_max, std::int64_t m_theta, unsigned workers) {
  check_grid(n_max, m_theta, "gamma_metric");
  GammaDistance d;
  double weight = 1.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    weight *= 0.5;
    const auto a = f.sample(n, m_theta, workers);
    const auto b = g.sample(n, m_theta, workers);
    double sup = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sup = std::max(sup, std::abs(b[j] - a[j]));
    d.value += weight * sup / (1.0 + sup);
  }
  d.tail_bound = weight;
  return d;
}

double lambda_estimate(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                       unsigned workers) {
  check_grid(n, m_theta, "lambda_estimate");
  return grid_mean(f.sample(n, m_theta, workers)) / static_cast<double>(n);
}

LambdaBest lambda_best(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                       unsigned workers) {
  check_grid(n, m_theta, "lambda_best");
  LambdaBest best{std::numeric_limits<double>::infinity(), 0};
  for (std::int64_t d = n;; d = (d + 1) / 2) {
    const double est = lambda_estimate(f, d, m_theta, workers);
    if (est < best.value) best = {est, d};
    if (d == 1) break;
  }
  return best;
}

FurmanGap furman_gap(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                     unsigned workers) {
  check_grid(n, m_theta, "furman_gap");
  FurmanGap r;
  r.n = n;
  r.m_theta = m_theta;
  std::tie(r.sup, r.sup_half) = sup_two_resolutions(f, n, m_theta, workers);
  r.lambda = lambda_best(f, n, m_theta, workers);
  r.gap = r.sup - r.lambda.value;
  r.gap_half = r.sup_half - r.lambda.value;
  return r;
}

std::vector<UscProbeRow> uniform_usc_probe(const SubadditiveCocycle& f,
                                           const std::vector<SubadditiveCocycle>& perturbations,
                                           std::int64_t n, std::int64_t m_theta,
                                           std::int64_t metric_n_max, unsigned workers) {
  check_grid(n, m_theta, "uniform_usc_probe");
  const LambdaBest lambda = lambda_best(f, n, m_theta, workers);
  std::vector<UscProbeRow> rows;
  for (const auto& g : perturbations) {
    UscProbeRow row;
    row.tag = g.tag();
    const auto dist = gamma_metric(f, g, metric_n_max, m_theta, workers);
    row.distance = dist.value;
    row.distance_tail = dist.tail_bound;
    const auto [sup, sup_half] = sup_two_resolutions(g, n, m_theta, workers);
    row.sup_gap = sup - lambda.value;
    row.sup_gap_half = sup_half - lambda.value;
    row.n = n;
    row.m_theta = m_theta;
    rows.push_back(row);
  }
  return rows;
}

std::string usc_probe_csv(const std::vector<UscProbeRow>& rows) {
  std::string out = "distance,distance_tail,sup_gap,sup_gap_half,n,m_theta,tag\n";
  for (const auto& r : rows) {
    out += fmt17(r.distance) + "," + fmt17(r.distance_tail) + "," + fmt17(r.sup_gap) + "," +
           fmt17(r.sup_gap_half) + "," + std::to_string(r.n) + "," + std::to_string(r.m_theta) +
           ",\"" + r.tag + "\"\n";
  }
  return out;
}

double subadditivity_violation(const SubadditiveCocycle& f,
                               const std::vector<SubadditivityTriple>& triples) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& t : triples) {
    if (t.n < 1 || t.m < 1) throw PreconditionError("subadditivity_violation: n, m must be >= 1");
    const double lhs = f(t.n + t.m, t.x);
    const double rhs = f(t.n, t.x) + f(t.m, t.x + static_cast<double>(t.n) * f.omega());
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace quasispec
