#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasispec/cocycle.hpp"
#include "quasispec/intervals.hpp"
#include "quasispec/rotation_cf.hpp"
#include "quasispec/sampling.hpp"

namespace quasispec {

/// Floquet discriminant: trace of A^E_q(theta) at omega = p/q.
double discriminant(const SamplingFunction& f, const Approximant& pq, double energy,
                    double theta);

/// Union spectrum of the period-q operators at omega = p/q.
struct SpectrumRecord {
  Approximant frequency;
  IntervalSet bands;
  double e_resolution = 0.0;
  std::int64_t theta_grid = 0;  // phases per unit circle; a multiple of q
  bool refined = false;         // golden-section refinement of theta extrema

  nlohmann::json to_json() const;
  static SpectrumRecord from_json(const nlohmann::json& j);
};

struct SpectrumOptions {
  static constexpr double kEdgeTolerance = 1e-10;

  double e_res = 1e-3;
  /// 0 selects the default: 8 q (1 + degree) for trigonometric polynomials,
  /// max(2^12, 64 q) otherwise. Rounded up to a multiple of q.
  std::int64_t theta_grid = 0;
  unsigned workers = 0;
};

/// Grid size actually used for f at denominator q.
std::int64_t effective_theta_grid(const SamplingFunction& f, std::int64_t q,
                                  std::int64_t requested);

/// {E : |Delta(E, theta)| <= 2 for some theta}. Energies in the window are
/// scanned at spacing e_res together with one interior point of every
/// theta = 0 band; an energy is in when [min_theta Delta, max_theta Delta]
/// meets [-2, 2]. Edges are bisected to 1e-10. Throws NumericalError if no
/// band is found.
SpectrumRecord spectrum_rational(const SamplingFunction& f, const Approximant& pq,
                                 const SpectrumOptions& opts = {});

/// Sorted eigenvalues of the q x q Floquet block at Bloch phase k (the
/// operator at phase theta restricted to q-periodic-up-to-e^{ik} vectors).
std::vector<double> floquet_eigenvalues(const SamplingFunction& f, const Approximant& pq,
                                        double theta, double bloch_phase);

struct LPlusRecord {
  double chi = 0.0;
  IntervalSet set;
  LyapunovProfile profile;
  double cell = 0.0;  // energy grid spacing used for the fattening
};

struct LPlusOptions {
  double e_res = 0.08;
  std::int64_t k = 1000;
  std::int64_t m_theta = 1000;
  ThetaSampling sampling = ThetaSampling::kOrbit;
  unsigned workers = 0;
};

/// Energies of the window where the Lyapunov estimate exceeds chi, each
/// widened by one grid cell and clipped to the window.
LPlusRecord l_plus_set(const SamplingFunction& f, const ContinuedFraction& omega_cf, double chi,
                       const LPlusOptions& opts = {});

/// Same thresholding applied to an existing profile.
LPlusRecord l_plus_from_profile(const SamplingFunction& f, LyapunovProfile profile, double chi);

using SpectrumProvider = std::function<SpectrumRecord(const Approximant&)>;

/// Provider that calls spectrum_rational with fixed options.
SpectrumProvider direct_provider(const SamplingFunction& f, const SpectrumOptions& opts);

struct ConvergenceRow {
  Approximant approximant;
  std::size_t bands = 0;
  double measure = 0.0;
  double measure_lplus = 0.0;       // measure(S n L+)
  double one_sided_next = 0.0;      // one_sided(S_n, S_{n+1})
  double one_sided_next_lplus = 0.0;
  double gap_deepest = 0.0;         // setwise_gap(S_n, S_deepest)
  double gap_deepest_lplus = 0.0;   // setwise_gap(S_n n L+, S_deepest n L+)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool has_lplus = false;
  double chi = 0.0;

  /// Numbers with 17 significant digits; L+ columns are empty without L+
  /// and the last row's "next" columns are empty.
  std::string to_csv() const;
};

/// Rows for each approximant in order; the last one serves as the proxy for
/// S(omega). Throws PreconditionError for fewer than two approximants or
/// for approximants that are not convergents of omega_cf.
ConvergenceTable convergence_table(const ContinuedFraction& omega_cf,
                                   const std::vector<Approximant>& approximant_range,
                                   const SpectrumProvider& spectra,
                                   const std::optional<LPlusRecord>& l_plus = std::nullopt);

struct HolderPair {
  Approximant first;
  Approximant second;
  double scale = 0.0;  // |first - second|
  double distance = 0.0;
  bool used = false;
};

struct HolderFit {
  double beta_hat = 0.0;
  double intercept = 0.0;
  std::vector<HolderPair> pairs;
  bool use_l_plus = false;

  std::string to_csv() const;
};

/// Least-squares slope of ln D against ln|w' - w''| with
/// D = one_sided(S(w') [n L+], S(w'')). Pairs with D = 0 are dropped; fewer
/// than three remaining, or no two distinct scales, throws NumericalError.
HolderFit holder_fit(const ContinuedFraction& omega_cf,
                     const std::vector<std::pair<Approximant, Approximant>>& approximant_pairs,
                     const SpectrumProvider& spectra,
                     const std::optional<LPlusRecord>& l_plus = std::nullopt);

/// Consecutive pairs (p_n/q_n, p_{n+1}/q_{n+1}) for the given list.
std::vector<std::pair<Approximant, Approximant>> consecutive_pairs(
    const std::vector<Approximant>& list);

/// Convergents of omega_cf whose denominators lie in [q_min, q_max].
std::vector<Approximant> approximants_in_range(const ContinuedFraction& omega_cf,
                                               std::int64_t q_min, std::int64_t q_max);

}  // namespace quasispec
