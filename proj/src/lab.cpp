#include "quasispec/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "quasispec/errors.hpp"
#include "quasispec/numfmt.hpp"
#include "quasispec/subadditive.hpp"

namespace quasispec {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------------- kinds

namespace {

struct KindInfo {
  ExperimentKind kind;
  const char* name;
  const char* title;
};

constexpr KindInfo kKinds[] = {
    {ExperimentKind::kCf, "cf", "continued fraction approximants of the frequency"},
    {ExperimentKind::kSpectrum, "spectrum", "union spectra of rational-frequency operators"},
    {ExperimentKind::kLyapunov, "lyapunov", "Lyapunov exponent profile over the energy window"},
    {ExperimentKind::kMeasureConvergence, "measure-convergence",
     "spectral measure and setwise convergence along continued fraction approximants"},
    {ExperimentKind::kHolderFit, "holder-fit",
     "Holder exponent of the spectrum in the frequency"},
    {ExperimentKind::kButterfly, "butterfly", "Hofstadter butterfly band data"},
    {ExperimentKind::kFurmanCheck, "furman-check",
     "uniform upper bound for subadditive cocycles (Furman) and its uniformity in the cocycle"},
    {ExperimentKind::kPerturbationCheck, "perturbation-check",
     "growth bound for perturbed cocycle products"},
    {ExperimentKind::kIdentityCheck, "identity-check",
     "transfer matrix / truncated determinant identity"},
};

const KindInfo& info(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw std::logic_error("unhandled experiment kind");
}

}  // namespace

std::string to_string(ExperimentKind kind) { return info(kind).name; }

std::string experiment_title(ExperimentKind kind) { return info(kind).title; }

const std::vector<std::string>& experiment_kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kKinds) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (const auto& k : kKinds) {
    if (s == k.name) return k.kind;
  }
  std::string known;
  for (const auto& n : experiment_kind_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("kind: unknown experiment \"" + s + "\" (expected one of " + known + ")");
}

// ------------------------------------------------------------------ config

ContinuedFraction frequency_from_json(const json& j) {
  try {
    if (j.is_number()) return ContinuedFraction::expand(j.get<double>());
    if (!j.is_object()) throw ConfigError("frequency: expected an object or a number");
    if (j.contains("golden")) return ContinuedFraction::golden_mean(j.at("golden").get<int>());
    if (j.contains("quotients")) {
      return ContinuedFraction::from_quotients(j.at("quotients").get<std::vector<std::int64_t>>(),
                                               j.value("terminates", false));
    }
    if (j.contains("decimal")) return ContinuedFraction::expand(j.at("decimal").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("frequency: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("frequency: ") + e.what());
  }
  throw ConfigError("frequency: expected one of \"golden\", \"quotients\", \"decimal\"");
}

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "kind",       "sampling",   "frequency",    "e_res",        "theta_grid", "k",
      "m_theta",    "theta_sampling", "e_count",  "e_min",        "e_max",      "chi",
      "use_l_plus", "l_plus_e_res", "q_min",      "q_max",        "p",          "q",
      "energies",   "perturbation", "epsilon",    "usc_shifts",   "metric_n_max", "cases",
      "k_max",      "seed",       "out",          "cache_dir",    "workers"};
  return fields;
}

template <class T>
void read(const json& j, const char* name, T& target) {
  if (!j.contains(name)) return;
  try {
    target = j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(name) + ": wrong type (got " + j.at(name).dump() + ")");
  }
}

template <class T>
void read(const json& j, const char* name, std::optional<T>& target) {
  if (!j.contains(name) || j.at(name).is_null()) return;
  T v{};
  read(j, name, v);
  target = v;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

Perturbation perturbation_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "energy_shift") return Perturbation::energy_shift(j.at("delta").get<double>());
    if (kind == "fejer") return Perturbation::fejer(j.at("n").get<int>());
    throw ConfigError("perturbation.kind: expected \"energy_shift\" or \"fejer\", got \"" + kind +
                      "\"");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("perturbation: ") + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_fields().count(key)) throw ConfigError(key + ": unknown field");
  }
  ExperimentConfig c;
  require(j.contains("kind"), "kind", "missing");
  std::string kind;
  read(j, "kind", kind);
  c.kind = experiment_kind_from_string(kind);
  if (j.contains("sampling")) c.sampling = j.at("sampling");
  if (j.contains("frequency")) c.frequency = j.at("frequency");
  read(j, "e_res", c.e_res);
  read(j, "theta_grid", c.theta_grid);
  read(j, "k", c.k);
  read(j, "m_theta", c.m_theta);
  read(j, "theta_sampling", c.theta_sampling);
  read(j, "e_count", c.e_count);
  read(j, "e_min", c.e_min);
  read(j, "e_max", c.e_max);
  read(j, "chi", c.chi);
  read(j, "use_l_plus", c.use_l_plus);
  read(j, "l_plus_e_res", c.l_plus_e_res);
  read(j, "q_min", c.q_min);
  read(j, "q_max", c.q_max);
  read(j, "p", c.p);
  read(j, "q", c.q);
  read(j, "energies", c.energies);
  if (j.contains("perturbation")) c.perturbation = j.at("perturbation");
  read(j, "epsilon", c.epsilon);
  read(j, "usc_shifts", c.usc_shifts);
  read(j, "metric_n_max", c.metric_n_max);
  read(j, "cases", c.cases);
  read(j, "k_max", c.k_max);
  read(j, "seed", c.seed);
  read(j, "out", c.out);
  read(j, "cache_dir", c.cache_dir);
  read(j, "workers", c.workers);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(e_res > 0.0, "e_res", "must be > 0");
  require(theta_grid >= 0, "theta_grid", "must be >= 1 (or 0 for automatic)");
  require(k >= 1, "k", "must be >= 1");
  require(m_theta >= 1, "m_theta", "must be >= 1");
  require(e_count >= 1, "e_count", "must be >= 1");
  require(!(e_min && e_max) || *e_min <= *e_max, "e_min", "must not exceed e_max");
  require(chi > 0.0, "chi", "must be > 0");
  require(l_plus_e_res > 0.0, "l_plus_e_res", "must be > 0");
  require(q_min >= 1, "q_min", "must be >= 1");
  require(q_max >= q_min, "q_max", "must be >= q_min");
  require(p.has_value() == q.has_value(), p ? "q" : "p", "p and q must be given together");
  require(!q || *q >= 1, "q", "must be >= 1");
  require(!energies.empty(), "energies", "must not be empty");
  require(epsilon >= 0.0, "epsilon", "must be >= 0");
  require(metric_n_max >= 1, "metric_n_max", "must be >= 1");
  require(cases >= 1, "cases", "must be >= 1");
  require(k_max >= 1, "k_max", "must be >= 1");
  require(!out.empty(), "out", "must name an output directory");
  try {
    theta_sampling_from_string(theta_sampling);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("theta_sampling: ") + e.what());
  }
  try {
    SamplingFunction::from_json(sampling);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sampling: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("sampling: ") + e.what());
  }
  frequency_from_json(frequency);
  perturbation_from_json(perturbation);
}

json ExperimentConfig::to_json() const {
  json j = {{"kind", to_string(kind)},
            {"sampling", sampling},
            {"frequency", frequency},
            {"e_res", e_res},
            {"theta_grid", theta_grid},
            {"k", k},
            {"m_theta", m_theta},
            {"theta_sampling", theta_sampling},
            {"e_count", e_count},
            {"chi", chi},
            {"use_l_plus", use_l_plus},
            {"l_plus_e_res", l_plus_e_res},
            {"q_min", q_min},
            {"q_max", q_max},
            {"energies", energies},
            {"perturbation", perturbation},
            {"epsilon", epsilon},
            {"usc_shifts", usc_shifts},
            {"metric_n_max", metric_n_max},
            {"cases", cases},
            {"k_max", k_max},
            {"seed", seed},
            {"out", out},
            {"cache_dir", cache_dir},
            {"workers", workers}};
  if (e_min) j["e_min"] = *e_min;
  if (e_max) j["e_max"] = *e_max;
  if (p) j["p"] = *p;
  if (q) j["q"] = *q;
  return j;
}

SamplingFunction ExperimentConfig::sampling_function() const {
  return SamplingFunction::from_json(sampling);
}

ContinuedFraction ExperimentConfig::frequency_cf() const { return frequency_from_json(frequency); }

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override \"" + assignment + "\": expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("override \"" + assignment + "\": empty key segment");
    if (!node->is_object()) {
      throw ConfigError("override \"" + assignment + "\": " + part + " is not inside an object");
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  return 1;
}

// ----------------------------------------------------------- cached compute

json profile_to_json(const LyapunovProfile& p) {
  return {{"energies", p.energies},         {"values", p.values},
          {"sup_over_theta", p.sup_over_theta}, {"k", p.k},
          {"theta_samples", p.theta_samples}, {"sampling", to_string(p.sampling)}};
}

LyapunovProfile profile_from_json(const json& j) {
  LyapunovProfile p;
  p.energies = j.at("energies").get<std::vector<double>>();
  p.values = j.at("values").get<std::vector<double>>();
  p.sup_over_theta = j.at("sup_over_theta").get<std::vector<double>>();
  p.k = j.at("k").get<std::int64_t>();
  p.theta_samples = j.at("theta_samples").get<std::int64_t>();
  p.sampling = theta_sampling_from_string(j.at("sampling").get<std::string>());
  if (p.values.size() != p.energies.size() || p.sup_over_theta.size() != p.energies.size()) {
    throw std::runtime_error("profile arrays differ in length");
  }
  return p;
}

SpectrumProvider cached_provider(const SamplingFunction& f, const json& sampling_desc,
                                 const SpectrumOptions& opts, ResultCache& cache) {
  return [f, sampling_desc, opts, &cache](const Approximant& pq) {
    const json descriptor = {{"type", "spectrum"},
                             {"sampling", sampling_desc},
                             {"p", pq.p},
                             {"q", pq.q},
                             {"e_res", opts.e_res},
                             {"theta_grid", effective_theta_grid(f, pq.q, opts.theta_grid)}};
    const CacheKey key = CacheKey::of(descriptor);
    if (auto hit = cache.lookup(key)) {
      try {
        SpectrumRecord rec = SpectrumRecord::from_json(*hit);
        rec.frequency.index = pq.index;
        return rec;
      } catch (const std::exception&) {
        // Structurally valid JSON with the wrong shape: recompute below.
      }
    }
    SpectrumRecord rec = spectrum_rational(f, pq, opts);
    cache.store(key, rec.to_json());
    return rec;
  };
}

std::vector<Approximant> farey_fractions(std::int64_t q_max) {
  if (q_max < 1) throw PreconditionError("farey_fractions: q_max must be >= 1");
  std::vector<Approximant> out;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    for (std::int64_t p = 0; p < q; ++p) {
      if (std::gcd(p, q) == 1) out.push_back({p, q, 0});
    }
  }
  return out;
}

namespace {

struct Context {
  const ExperimentConfig& config;
  SamplingFunction f;
  json sampling_desc;
  ContinuedFraction cf;
  ResultCache& cache;
  fs::path out_dir;
  std::vector<fs::path> outputs;
  json summary = json::object();

  SpectrumOptions spectrum_options() const {
    SpectrumOptions o;
    o.e_res = config.e_res;
    o.theta_grid = config.theta_grid;
    o.workers = config.workers;
    return o;
  }

  SpectrumProvider spectra() { return cached_provider(f, sampling_desc, spectrum_options(), cache); }

  ThetaGrid theta_grid() const {
    return {theta_sampling_from_string(config.theta_sampling), config.m_theta, 0.0};
  }

  LyapunovProfile profile(const std::vector<double>& energies) {
    const json descriptor = {{"type", "lyapunov"},
                             {"sampling", sampling_desc},
                             {"quotients", cf.quotients()},
                             {"omega", cf.value()},
                             {"energies", energies},
                             {"k", config.k},
                             {"m_theta", config.m_theta},
                             {"theta_sampling", config.theta_sampling}};
    const CacheKey key = CacheKey::of(descriptor);
    if (auto hit = cache.lookup(key)) {
      try {
        return profile_from_json(*hit);
      } catch (const std::exception&) {
      }
    }
    auto p = lyapunov_profile(f, cf.value(), energies, config.k, theta_grid(), config.workers);
    cache.store(key, profile_to_json(p));
    return p;
  }

  std::optional<LPlusRecord> l_plus() {
    if (!config.use_l_plus) return std::nullopt;
    const auto [lo, hi] = energy_window(f);
    const auto steps = static_cast<std::int64_t>(std::ceil((hi - lo) / config.l_plus_e_res));
    auto rec = l_plus_from_profile(f, profile(linspace(lo, hi, steps + 1)), config.chi);
    summary["l_plus"] = {{"chi", rec.chi}, {"set", rec.set.to_json()}, {"measure", rec.set.measure()}};
    return rec;
  }

  std::vector<Approximant> approximant_range() const {
    auto list = approximants_in_range(cf, config.q_min, config.q_max);
    if (list.empty()) {
      throw ConfigError("q_min/q_max: no convergent denominators in [" +
                        std::to_string(config.q_min) + ", " + std::to_string(config.q_max) + "]");
    }
    return list;
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("could not write " + path.string());
    outputs.push_back(path);
  }
};

void run_cf(Context& ctx) {
  std::string lines;
  const auto list = approximants(ctx.cf);
  const double omega = ctx.cf.value();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& a = list[i];
    lines += json{{"n", a.index},
                  {"a", ctx.cf.quotients()[i]},
                  {"p", a.p},
                  {"q", a.q},
                  {"value", a.value()},
                  {"error", std::abs(omega - a.value())}}
                 .dump() +
             "\n";
  }
  ctx.write("cf.jsonl", lines);
  ctx.summary = {{"value", omega}, {"terms", list.size()}, {"rational", ctx.cf.is_rational()}};
}

void run_spectrum(Context& ctx) {
  std::vector<Approximant> list;
  if (ctx.config.q) {
    list.push_back({*ctx.config.p, *ctx.config.q, 0});
  } else {
    list = ctx.approximant_range();
  }
  const auto spectra = ctx.spectra();
  json records = json::array();
  json measures = json::array();
  for (const auto& a : list) {
    const auto rec = spectra(a);
    records.push_back(rec.to_json());
    measures.push_back({{"p", a.p}, {"q", a.q}, {"measure", rec.bands.measure()}});
  }
  ctx.write("spectrum.json", json{{"records", records}}.dump(2) + "\n");
  ctx.summary = {{"measures", measures}};
}

void run_lyapunov(Context& ctx) {
  const auto [wlo, whi] = energy_window(ctx.f);
  const double lo = ctx.config.e_min.value_or(wlo);
  const double hi = ctx.config.e_max.value_or(whi);
  const auto p = ctx.profile(linspace(lo, hi, ctx.config.e_count));
  ctx.write("lyapunov.csv", p.to_csv());
  ctx.summary = {{"min_L", *std::min_element(p.values.begin(), p.values.end())},
                 {"max_L", *std::max_element(p.values.begin(), p.values.end())}};
}

void run_measure_convergence(Context& ctx) {
  const auto list = ctx.approximant_range();
  const auto l_plus = ctx.l_plus();
  const auto table = convergence_table(ctx.cf, list, ctx.spectra(), l_plus);
  ctx.write("convergence.csv", table.to_csv());
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back({{"q", r.approximant.q}, {"measure", r.measure}});
  ctx.summary["measures"] = rows;
  ctx.summary["proxy_q"] = list.back().q;
}

void run_holder_fit(Context& ctx) {
  const auto list = ctx.approximant_range();
  const auto l_plus = ctx.l_plus();
  const auto fit = holder_fit(ctx.cf, consecutive_pairs(list), ctx.spectra(), l_plus);
  ctx.write("holder.csv", fit.to_csv());
  std::size_t used = 0;
  for (const auto& p : fit.pairs) used += p.used ? 1 : 0;
  ctx.summary["beta_hat"] = fit.beta_hat;
  ctx.summary["intercept"] = fit.intercept;
  ctx.summary["pairs_used"] = used;
  ctx.summary["use_l_plus"] = fit.use_l_plus;
  ctx.summary["note"] =
      "empirical exponent over the full computed set; energies of slow convergence are not "
      "excluded";
  ctx.write("holder_summary.json", ctx.summary.dump(2) + "\n");
}

void run_butterfly(Context& ctx) {
  const auto spectra = ctx.spectra();
  std::string lines;
  std::size_t rows = 0;
  for (const auto& a : farey_fractions(ctx.config.q_max)) {
    const auto rec = spectra(a);
    lines += json{{"p", a.p}, {"q", a.q}, {"bands", rec.bands.to_json()}}.dump() + "\n";
    ++rows;
  }
  ctx.write("butterfly.jsonl", lines);
  ctx.summary = {{"rows", rows}, {"q_max", ctx.config.q_max}};
}

void run_furman_check(Context& ctx) {
  const double omega = ctx.cf.value();
  const auto n = ctx.config.k;
  const auto m = ctx.config.m_theta;
  const unsigned w = ctx.config.workers;
  std::string furman = "E,n,m_theta,sup,sup_half,lambda,lambda_depth,gap,gap_half\n";
  std::string usc = "E,distance,distance_tail,sup_gap,sup_gap_half,n,m_theta,tag\n";
  double worst = -std::numeric_limits<double>::infinity();
  for (double e : ctx.config.energies) {
    const auto cocycle = SubadditiveCocycle::schrodinger(ctx.f, omega, e);
    const auto g = furman_gap(cocycle, n, m, w);
    worst = std::max(worst, g.gap);
    furman += fmt17(e) + "," + std::to_string(n) + "," + std::to_string(m) + "," + fmt17(g.sup) +
              "," + fmt17(g.sup_half) + "," + fmt17(g.lambda.value) + "," +
              std::to_string(g.lambda.depth) + "," + fmt17(g.gap) + "," + fmt17(g.gap_half) + "\n";
    std::vector<SubadditiveCocycle> perturbations{cocycle};
    for (double s : ctx.config.usc_shifts) {
      perturbations.push_back(SubadditiveCocycle::schrodinger(ctx.f, omega, e + s));
    }
    const auto rows = uniform_usc_probe(cocycle, perturbations, n, m, ctx.config.metric_n_max, w);
    for (const auto& r : rows) {
      usc += fmt17(e) + "," + fmt17(r.distance) + "," + fmt17(r.distance_tail) + "," +
             fmt17(r.sup_gap) + "," + fmt17(r.sup_gap_half) + "," + std::to_string(r.n) + "," +
             std::to_string(r.m_theta) + ",\"" + r.tag + "\"\n";
    }
  }
  ctx.write("furman.csv", furman);
  ctx.write("usc.csv", usc);
  ctx.summary = {{"max_gap", worst}};
}

void run_perturbation_check(Context& ctx) {
  const auto pert = perturbation_from_json(ctx.config.perturbation);
  std::string csv = "E,k,delta0,lyapunov,epsilon,log_err,log_bound,within_bound\n";
  std::size_t violations = 0;
  for (double e : ctx.config.energies) {
    const auto rows = perturbation_profile(ctx.f, ctx.cf.value(), e, pert, ctx.config.k,
                                           ctx.config.epsilon, ctx.theta_grid());
    for (const auto& r : rows) {
      violations += r.within_bound() ? 0 : 1;
      csv += fmt17(e) + "," + std::to_string(r.k) + "," + fmt17(r.delta0) + "," +
             fmt17(r.lyapunov) + "," + fmt17(r.epsilon) + "," + fmt17(r.log_err) + "," +
             fmt17(r.log_bound) + "," + (r.within_bound() ? "1" : "0") + "\n";
    }
  }
  ctx.write("perturbation.csv", csv);
  ctx.summary = {{"violations", violations}};
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void run_identity_check(Context& ctx) {
  std::mt19937_64 rng(ctx.config.seed);
  const double omega = ctx.cf.value();
  std::string csv = "case,family,k,theta,E,residual\n";
  double worst = 0.0;
  for (std::int64_t c = 0; c < ctx.config.cases; ++c) {
    const auto family = rng() % 3;
    SamplingFunction f = SamplingFunction::zero();
    std::string name;
    if (family == 0) {
      f = SamplingFunction::cosine(4.0 * unit(rng));
      name = "cosine";
    } else if (family == 1) {
      const int deg = 1 + static_cast<int>(rng() % 3);
      std::vector<std::complex<double>> coeffs(2 * deg + 1);
      for (int j = 1; j <= deg; ++j) {
        const std::complex<double> z(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
        coeffs[deg + j] = z;
        coeffs[deg - j] = std::conj(z);
      }
      coeffs[deg] = 2.0 * unit(rng) - 1.0;
      f = SamplingFunction::trig(TrigPolynomial(coeffs));
      name = "trigpoly";
    } else {
      f = SamplingFunction::scaled(1.0 + 2.0 * unit(rng),
                                   SamplingFunction::weierstrass(0.25 + 0.75 * unit(rng)));
      name = "weierstrass";
    }
    const auto k = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(ctx.config.k_max));
    const double theta = unit(rng);
    const double e = 8.0 * unit(rng) - 4.0;
    const double r = cocycle_det_identity_check(f, omega, theta, e, k);
    worst = std::max(worst, r);
    csv += std::to_string(c) + "," + name + "," + std::to_string(k) + "," + fmt17(theta) + "," +
           fmt17(e) + "," + fmt17(r) + "\n";
  }
  ctx.write("identity.csv", csv);
  ctx.summary = {{"max_residual", worst}, {"cases", ctx.config.cases}};
}

}  // namespace

RunReport run(const ExperimentConfig& config, const WarnSink& warn) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir(config.out);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("out: cannot create " + out_dir.string() + ": " + ec.message());

  ResultCache cache(config.cache_dir, warn);
  const SamplingFunction f = config.sampling_function();
  Context ctx{config, f, f.to_json(), config.frequency_cf(), cache, out_dir, {}, json::object()};

  switch (config.kind) {
    case ExperimentKind::kCf:
      run_cf(ctx);
      break;
    case ExperimentKind::kSpectrum:
      run_spectrum(ctx);
      break;
    case ExperimentKind::kLyapunov:
      run_lyapunov(ctx);
      break;
    case ExperimentKind::kMeasureConvergence:
      run_measure_convergence(ctx);
      break;
    case ExperimentKind::kHolderFit:
      run_holder_fit(ctx);
      break;
    case ExperimentKind::kButterfly:
      run_butterfly(ctx);
      break;
    case ExperimentKind::kFurmanCheck:
      run_furman_check(ctx);
      break;
    case ExperimentKind::kPerturbationCheck:
      run_perturbation_check(ctx);
      break;
    case ExperimentKind::kIdentityCheck:
      run_identity_check(ctx);
      break;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RunReport report;
  json outputs = json::array();
  for (const auto& p : ctx.outputs) outputs.push_back(p.filename().string());
  report.manifest = {{"experiment", experiment_title(config.kind)},
                     {"kind", to_string(config.kind)},
                     {"version", code_version_tag()},
                     {"config", config.to_json()},
                     {"wall_time_s", wall},
                     {"cache",
                      {{"dir", config.cache_dir},
                       {"enabled", cache.enabled()},
                       {"hits", cache.hits()},
                       {"misses", cache.misses()}}},
                     {"outputs", outputs},
                     {"summary", ctx.summary}};
  {
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    out << report.manifest.dump(2) << "\n";
  }
  report.outputs = ctx.outputs;
  report.outputs.push_back(out_dir / "manifest.json");
  return report;
}

}  // namespace quasispec
