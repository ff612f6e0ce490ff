#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "quasispec/errors.hpp"
#include "quasispec/lab.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw quasispec::ConfigError("config: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw quasispec::ConfigError("config: " + path + " is not valid JSON");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for quasiperiodic Schrodinger operators"};
  app.set_version_flag("--version", std::string(QUASISPEC_VERSION));

  std::string kind;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> out, cache_dir, theta_sampling;
  std::optional<unsigned> workers;
  std::optional<double> e_res, chi;
  std::optional<std::int64_t> k, m_theta, theta_grid, q_min, q_max;
  bool use_l_plus = false;

  std::string kinds;
  for (const auto& n : quasispec::experiment_kind_names()) kinds += (kinds.empty() ? "" : ", ") + n;
  app.add_option("kind", kind, "Experiment: " + kinds)->required();
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--override", overrides, "key=value (dotted keys reach into objects)");
  app.add_option("--out", out, "Output directory");
  app.add_option("--cache-dir", cache_dir, "Result cache directory (env QUASISPEC_CACHE)");
  app.add_option("--workers", workers, "Worker threads (0: all cores)");
  app.add_option("--e-res", e_res, "Energy scan spacing");
  app.add_option("--theta-grid", theta_grid, "Phases per unit circle for rational spectra");
  app.add_option("--k", k, "Cocycle depth");
  app.add_option("--m-theta", m_theta, "Phase samples for Lyapunov averages");
  app.add_option("--theta-sampling", theta_sampling, "uniform or orbit");
  app.add_option("--chi", chi, "Lyapunov threshold for L+");
  app.add_option("--q-min", q_min, "Smallest approximant denominator");
  app.add_option("--q-max", q_max, "Largest approximant denominator");
  app.add_flag("--l-plus", use_l_plus, "Restrict comparisons to L+");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    // Defaults, then the file (top-level keys replace defaults wholesale).
    json config = quasispec::ExperimentConfig{}.to_json();
    if (!config_path.empty()) {
      const json file = load_config(config_path);
      if (!file.is_object()) throw quasispec::ConfigError("config: expected a JSON object");
      config.update(file);
    }
    config["kind"] = kind;
    if (const char* env = std::getenv("QUASISPEC_CACHE"); env && *env) config["cache_dir"] = env;
    for (const auto& o : overrides) quasispec::apply_override(config, o);
    if (out) config["out"] = *out;
    if (cache_dir) config["cache_dir"] = *cache_dir;
    if (workers) config["workers"] = *workers;
    if (e_res) config["e_res"] = *e_res;
    if (theta_grid) config["theta_grid"] = *theta_grid;
    if (k) config["k"] = *k;
    if (m_theta) config["m_theta"] = *m_theta;
    if (theta_sampling) config["theta_sampling"] = *theta_sampling;
    if (chi) config["chi"] = *chi;
    if (q_min) config["q_min"] = *q_min;
    if (q_max) config["q_max"] = *q_max;
    if (use_l_plus) config["use_l_plus"] = true;

    const auto parsed = quasispec::ExperimentConfig::from_json(config);
    const auto report = quasispec::run(
        parsed, [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
    for (const auto& p : report.outputs) std::cout << p.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return quasispec::exit_code_for(e);
  }
}
