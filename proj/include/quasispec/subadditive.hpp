#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "quasispec/sampling.hpp"

namespace quasispec {

/// Continuous subadditive cocycle {f_n} over x -> x + omega on the circle:
/// f_{n+m}(x) <= f_n(x) + f_m(x + n omega).
class SubadditiveCocycle {
 public:
  using Generator = std::function<double(std::int64_t n, double x)>;
  /// Values of f_n at x_j = j / m_theta, j = 0..m_theta-1.
  using GridSampler =
      std::function<std::vector<double>(std::int64_t n, std::int64_t m_theta, unsigned workers)>;

  SubadditiveCocycle(Generator generator, double omega, std::string tag);

  /// f_n = ln||A^E_n|| for the Schrodinger cocycle of f.
  static SubadditiveCocycle schrodinger(const SamplingFunction& f, double omega, double energy);
  /// f_n = n c.
  static SubadditiveCocycle additive(double c, double omega);
  static SubadditiveCocycle zero(double omega) { return additive(0.0, omega); }
  /// Birkhoff sums f_n(x) = sum_{i<n} phi(x + i omega).
  static SubadditiveCocycle birkhoff(const SamplingFunction& phi, double omega);

  /// g_n = f_n + c (subadditive for c >= 0).
  SubadditiveCocycle shifted(double c) const;

  double operator()(std::int64_t n, double x) const { return generator_(n, x); }
  std::vector<double> sample(std::int64_t n, std::int64_t m_theta, unsigned workers = 0) const;

  double omega() const { return omega_; }
  const std::string& tag() const { return tag_; }

 private:
  Generator generator_;
  GridSampler sampler_;
  double omega_ = 0.0;
  std::string tag_;
};

struct GammaDistance {
  double value = 0.0;
  double tail_bound = 0.0;  // 2^{-n_max}: truncation error of the series
};

/// sum_{n<=n_max} 2^{-n} ||g_n - f_n|| / (1 + ||g_n - f_n||), sup-norms on
/// the uniform m_theta grid.
GammaDistance gamma_metric(const SubadditiveCocycle& f, const SubadditiveCocycle& g,
                           std::int64_t n_max, std::int64_t m_theta, unsigned workers = 0);

/// (1/n) grid average of f_n.
double lambda_estimate(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                       unsigned workers = 0);

/// Depths n, ceil(n/2), ceil(n/4), ..., 1 and the minimal (1/d) average of
/// f_d over them.
struct LambdaBest {
  double value = 0.0;
  std::int64_t depth = 0;
};
LambdaBest lambda_best(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                       unsigned workers = 0);

struct FurmanGap {
  std::int64_t n = 0;
  std::int64_t m_theta = 0;
  double sup = 0.0;       // max over the grid of (1/n) f_n
  double sup_half = 0.0;  // same on a grid of about m_theta / 2 points
  LambdaBest lambda;
  double gap = 0.0;       // sup - lambda.value
  double gap_half = 0.0;
};

FurmanGap furman_gap(const SubadditiveCocycle& f, std::int64_t n, std::int64_t m_theta,
                     unsigned workers = 0);

struct UscProbeRow {
  std::string tag;
  double distance = 0.0;
  double distance_tail = 0.0;
  double sup_gap = 0.0;       // max_x (1/n) g_n(x) - Lambda_est(f)
  double sup_gap_half = 0.0;  // same at half the grid resolution
  std::int64_t n = 0;
  std::int64_t m_theta = 0;
};

/// One row per perturbation g: gamma distance to f and the sup gap of g
/// above the best Lambda estimate of f.
std::vector<UscProbeRow> uniform_usc_probe(const SubadditiveCocycle& f,
                                           const std::vector<SubadditiveCocycle>& perturbations,
                                           std::int64_t n, std::int64_t m_theta,
                                           std::int64_t metric_n_max = 40, unsigned workers = 0);

/// CSV with header distance,distance_tail,sup_gap,sup_gap_half,n,m_theta,tag.
std::string usc_probe_csv(const std::vector<UscProbeRow>& rows);

struct SubadditivityTriple {
  std::int64_t n = 1;
  std::int64_t m = 1;
  double x = 0.0;
};

/// max over triples of f_{n+m}(x) - f_n(x) - f_m(x + n omega); <= 0 up to
/// rounding for a subadditive cocycle.
double subadditivity_violation(const SubadditiveCocycle& f,
                               const std::vector<SubadditivityTriple>& triples);

}  // namespace quasispec
