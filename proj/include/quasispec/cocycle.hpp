#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "quasispec/sampling.hpp"

namespace quasispec {

/// Real 2x2 matrix [[m11, m12], [m21, m22]].
struct Mat2 {
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

  static Mat2 identity() { return {}; }

  double det() const { return m11 * m22 - m12 * m21; }
  double trace() const { return m11 + m22; }
  /// Operator 2-norm (largest singular value), closed form.
  double norm() const;
  double max_abs() const;
  /// Adjugate; equals the inverse when det = 1.
  Mat2 adjugate() const { return {m22, -m12, -m21, m11}; }
  Mat2 scaled(double s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }

  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Overflow-safe product: represents e^{log_scale} * mat with
/// ||mat|| in [1/2, 2] after every renormalization.
struct LogMat {
  Mat2 mat;
  double log_scale = 0.0;

  /// this <- a * this, then renormalize.
  void left_multiply(const Mat2& a);
  void renormalize();
  double log_norm() const;
  /// e^{log_scale} * mat; overflows to inf for huge products.
  Mat2 to_mat() const;
  /// Inverse of a determinant-one product: det(mat) = e^{-2 log_scale}, so
  /// (e^s M)^{-1} = e^s adj(M).
  LogMat sl2_inverse() const { return {mat.adjugate(), log_scale}; }
};

/// ln || e^{sa} A - e^{sb} B ||, -inf when the difference vanishes.
double log_norm_difference(const LogMat& a, const LogMat& b);

/// Schrodinger transfer matrix [[E - f(theta), -1], [1, 0]].
Mat2 transfer_matrix(const SamplingFunction& f, double energy, double theta);

/// A_k(theta) = A(theta + (k-1) omega) ... A(theta), A_0 = I, and for k < 0
/// A_k(theta) = (A_{-k}(theta + k omega))^{-1}.
LogMat iterate(const SamplingFunction& f, double omega, double energy, double theta,
               std::int64_t k);

enum class ThetaSampling { kUniform, kOrbit };

/// Phases at which ln||A_k|| is averaged: j/count (uniform) or
/// theta0 + j omega (orbit), j = 0..count-1.
struct ThetaGrid {
  ThetaSampling mode = ThetaSampling::kOrbit;
  std::int64_t count = 10000;
  double theta0 = 0.0;

  static ThetaGrid uniform(std::int64_t count) { return {ThetaSampling::kUniform, count, 0.0}; }
  static ThetaGrid orbit(std::int64_t count, double theta0 = 0.0) {
    return {ThetaSampling::kOrbit, count, theta0};
  }
  double at(std::int64_t j, double omega) const;
};

std::string to_string(ThetaSampling mode);
ThetaSampling theta_sampling_from_string(const std::string& s);

/// Calls visit(j, row) for j = 0..grid.count-1 in increasing order, where
/// row[e] = ln||A_k(theta_j)|| at energies[e]. Rows are computed in
/// parallel; the visit order and every value are independent of `workers`.
void scan_log_norms(const SamplingFunction& f, double omega, std::span<const double> energies,
                    std::int64_t k, const ThetaGrid& grid, unsigned workers,
                    const std::function<void(std::int64_t, std::span<const double>)>& visit);

/// Batched kernel: out[e] = ln||prod_i [[E_e - v_i, -1], [1, 0]]|| for the
/// potential sequence v (applied in order).
void log_norm_kernel(std::span<const double> potential, std::span<const double> energies,
                     std::span<double> out);

/// Batched kernel: out[e] = trace of the same product (may be +-inf).
void trace_kernel(std::span<const double> potential, std::span<const double> energies,
                  std::span<double> out);

struct LyapunovProfile {
  std::vector<double> energies;
  std::vector<double> values;          // (1/k) mean_theta ln||A_k||
  std::vector<double> sup_over_theta;  // (1/k) max_theta ln||A_k||
  std::int64_t k = 0;
  std::int64_t theta_samples = 0;
  ThetaSampling sampling = ThetaSampling::kOrbit;

  /// CSV with header E,L_est,sup_theta,k and 17 significant digits.
  std::string to_csv() const;
};

LyapunovProfile lyapunov_profile(const SamplingFunction& f, double omega,
                                 std::span<const double> energies, std::int64_t k,
                                 const ThetaGrid& grid, unsigned workers = 0);

/// (1/k) mean over the grid of ln||A_k(theta)||.
double lyapunov_estimate(const SamplingFunction& f, double omega, double energy, std::int64_t k,
                         const ThetaGrid& grid);

struct UpperCheck {
  double sup = 0.0;
  double avg = 0.0;
};

/// sup and mean of (1/k) ln||A_k(theta)|| over the grid.
UpperCheck uniform_upper_check(const SamplingFunction& f, double omega, double energy,
                               std::int64_t k, const ThetaGrid& grid);

/// Fraction of grid phases with (1/k) ln||A_k(theta)|| > t.
double level_set_measure(const SamplingFunction& f, double omega, double energy, double t,
                         std::int64_t k, const ThetaGrid& grid);

/// Replacement cocycle D compared against A^E.
struct Perturbation {
  enum class Kind { kEnergyShift, kFejer };
  Kind kind = Kind::kEnergyShift;
  double delta = 0.0;  // energy shift
  int fejer_n = 0;     // f -> K_N * f

  static Perturbation energy_shift(double delta) { return {Kind::kEnergyShift, delta, 0}; }
  static Perturbation fejer(int n) { return {Kind::kFejer, 0.0, n}; }
};

struct PerturbationResult {
  std::int64_t k = 0;
  double delta0 = 0.0;     // sup_theta ||A - D||
  double lyapunov = 0.0;   // L_est at depth k on the same grid
  double epsilon = 0.0;
  double log_err = 0.0;    // ln sup_theta ||A_k - D_k||
  double log_bound = 0.0;  // ln(delta0) + k (L_est + epsilon)

  double err() const;
  double bound() const;
  bool within_bound() const { return log_err <= log_bound; }
};

/// Results for every depth 1..k_max from one pass along each phase.
std::vector<PerturbationResult> perturbation_profile(const SamplingFunction& f, double omega,
                                                     double energy, const Perturbation& pert,
                                                     std::int64_t k_max, double epsilon,
                                                     const ThetaGrid& grid);

PerturbationResult perturbation_error(const SamplingFunction& f, double omega, double energy,
                                      const Perturbation& pert, std::int64_t k, double epsilon,
                                      const ThetaGrid& grid);

/// P_k(theta) = det(E - h_{[0,k-1];theta}) by the three-term recurrence.
double det_truncated(const SamplingFunction& f, double omega, double theta, double energy,
                     std::int64_t k);

/// G_{[u,v]}(i, j) = <delta_i, (h_{[u,v];theta} - E)^{-1} delta_j> via Cramer's
/// rule on the tridiagonal restriction. Throws NumericalError naming the
/// interval when the infinity-norm condition number exceeds max_condition.
double green_restricted(const SamplingFunction& f, double omega, double theta, double energy,
                        std::int64_t u, std::int64_t v, std::int64_t i, std::int64_t j,
                        double max_condition = 1e12);

/// |G(i,j)| = |left| |right| / |full| with left, right the determinants of
/// the blocks flanking the path from i to j.
struct CramerFactors {
  double left = 1.0;   // P_{min(i,j)-u}(theta + u omega)
  double right = 1.0;  // P_{v-max(i,j)}(theta + (max(i,j)+1) omega)
  double full = 1.0;   // P_{v-u+1}(theta + u omega)
};
CramerFactors cramer_factors(const SamplingFunction& f, double omega, double theta,
                             double energy, std::int64_t u, std::int64_t v, std::int64_t i,
                             std::int64_t j);

/// Max residual, relative to max(1, max |entry|), between A_k(theta) and
/// [[P_k(theta), -P_{k-1}(theta+w)], [P_{k-1}(theta), -P_{k-2}(theta+w)]].
double cocycle_det_identity_check(const SamplingFunction& f, double omega, double theta,
                                  double energy, std::int64_t k);

/// [-2 - sup|f|, 2 + sup|f|].
std::pair<double, double> energy_window(const SamplingFunction& f);

/// count points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::int64_t count);

}  // namespace quasispec
