#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasispec/cache.hpp"
#include "quasispec/cocycle.hpp"
#include "quasispec/rotation_cf.hpp"
#include "quasispec/sampling.hpp"
#include "quasispec/spectrum.hpp"

namespace quasispec {

enum class ExperimentKind {
  kCf,
  kSpectrum,
  kLyapunov,
  kMeasureConvergence,
  kHolderFit,
  kButterfly,
  kFurmanCheck,
  kPerturbationCheck,
  kIdentityCheck,
};

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& s);
const std::vector<std::string>& experiment_kind_names();

/// Human-readable name of what an experiment measures.
std::string experiment_title(ExperimentKind kind);

/// Frequency given as {"golden": terms}, {"quotients": [...]} or
/// {"decimal": x} (a bare number means decimal).
ContinuedFraction frequency_from_json(const nlohmann::json& j);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kCf;
  nlohmann::json sampling = {{"kind", "cosine"}, {"lambda", 2.0}};
  nlohmann::json frequency = {{"golden", 40}};

  double e_res = 1e-3;
  std::int64_t theta_grid = 0;  // 0: automatic
  std::int64_t k = 1000;
  std::int64_t m_theta = 1000;
  std::string theta_sampling = "orbit";
  std::int64_t e_count = 200;  // lyapunov energy grid
  std::optional<double> e_min, e_max;

  double chi = 0.5;
  bool use_l_plus = false;
  double l_plus_e_res = 0.08;

  std::int64_t q_min = 1;
  std::int64_t q_max = 89;
  std::optional<std::int64_t> p, q;  // single rational for kind spectrum

  std::vector<double> energies = {0.0};
  nlohmann::json perturbation = {{"kind", "energy_shift"}, {"delta", 1e-8}};
  double epsilon = 0.1;
  std::vector<double> usc_shifts = {1e-6};
  std::int64_t metric_n_max = 40;

  std::int64_t cases = 1000;
  std::int64_t k_max = 30;
  std::uint64_t seed = 1;

  std::string out = "out";
  std::string cache_dir;
  unsigned workers = 0;

  /// Field-level validation; throws ConfigError naming the offending key.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  SamplingFunction sampling_function() const;
  ContinuedFraction frequency_cf() const;
};

/// Applies "key=value" (dotted keys reach into objects). The value is read
/// as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

struct RunReport {
  int exit_code = 0;
  std::vector<std::filesystem::path> outputs;
  nlohmann::json manifest;
};

using WarnSink = std::function<void(const std::string&)>;

/// Runs the experiment and writes its primary output plus manifest.json to
/// config.out. Errors propagate as ConfigError / PreconditionError /
/// NumericalError; see exit_code_for.
RunReport run(const ExperimentConfig& config, const WarnSink& warn = {});

/// 2 for configuration or precondition errors, 3 for numerical failures,
/// 1 otherwise.
int exit_code_for(const std::exception& e);

/// Spectrum provider backed by the cache (pass-through when disabled).
SpectrumProvider cached_provider(const SamplingFunction& f, const nlohmann::json& sampling_desc,
                                 const SpectrumOptions& opts, ResultCache& cache);

/// Every reduced p/q in [0, 1) with q <= q_max, ordered by q then p.
std::vector<Approximant> farey_fractions(std::int64_t q_max);

nlohmann::json profile_to_json(const LyapunovProfile& p);
LyapunovProfile profile_from_json(const nlohmann::json& j);

}  // namespace quasispec
