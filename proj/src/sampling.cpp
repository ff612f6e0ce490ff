#include "quasispec/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "quasispec/errors.hpp"
#include "quasispec/rotation_cf.hpp"

namespace quasispec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> unit_phase(double turns) {
  const double a = kTwoPi * frac(turns);
  return {std::cos(a), std::sin(a)};
}

}  // namespace

// ---------------------------------------------------------------- TrigPolynomial

TrigPolynomial::TrigPolynomial(std::vector<std::complex<double>> coeffs)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() % 2 != 1) {
    throw PreconditionError("trig polynomial needs 2N+1 coefficients c_{-N..N}");
  }
  double scale = 0.0;
  for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
  const int n = degree();
  for (int j = 0; j <= n; ++j) {
    const auto cp = coeffs_[n + j];
    const auto cm = coeffs_[n - j];
    if (std::abs(cp - std::conj(cm)) > 1e-12 * std::max(1.0, scale)) {
      throw PreconditionError("trig polynomial is not real-valued: c_{-" + std::to_string(j) +
                              "} != conj(c_" + std::to_string(j) + ")");
    }
  }
}

TrigPolynomial TrigPolynomial::constant(double c) {
  return TrigPolynomial(std::vector<std::complex<double>>{{c, 0.0}});
}

std::complex<double> TrigPolynomial::coefficient(int j) const {
  const int n = degree();
  if (j < -n || j > n) return {0.0, 0.0};
  return coeffs_[n + j];
}

std::complex<double> TrigPolynomial::evaluate_complex(double theta) const {
  const int n = degree();
  std::complex<double> sum = coeffs_[n];
  for (int j = 1; j <= n; ++j) {
    const auto e = unit_phase(static_cast<double>(j) * frac(theta));
    sum += coeffs_[n + j] * e + coeffs_[n - j] * std::conj(e);
  }
  return sum;
}

double TrigPolynomial::operator()(double theta) const {
  const int n = degree();
  double sum = coeffs_[n].real();
  const double x = frac(theta);
  for (int j = 1; j <= n; ++j) {
    const auto e = unit_phase(static_cast<double>(j) * x);
    // c_j e + conj(c_j e) with c_{-j} = conj(c_j)
    sum += 2.0 * (coeffs_[n + j] * e).real();
  }
  return sum;
}

double TrigPolynomial::sup_bound() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += std::abs(c);
  return s;
}

// -------------------------------------------------------------- SamplingFunction

SamplingFunction::SamplingFunction(Kind k) : kind_(std::move(k)) {
  std::visit(
      [this](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Cosine>) {
          holder_gamma_ = 1.0;
          sup_norm_ = 2.0 * std::abs(v.lambda);
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          holder_gamma_ = 1.0;
          sup_norm_ = v.sup_bound();
        } else if constexpr (std::is_same_v<T, Weierstrass>) {
          holder_gamma_ = v.gamma;
          double s = 0.0;
          for (int j = 0; j <= v.depth; ++j) s += std::exp2(-v.gamma * j);
          sup_norm_ = s;
        } else if constexpr (std::is_same_v<T, Scaled>) {
          holder_gamma_ = v.inner->holder_gamma();
          sup_norm_ = std::abs(v.scale) * v.inner->sup_norm();
        } else {
          holder_gamma_ = v.inner->holder_gamma();
          sup_norm_ = v.inner->sup_norm();
        }
      },
      kind_);
}

SamplingFunction SamplingFunction::cosine(double lambda) {
  if (!std::isfinite(lambda)) throw PreconditionError("cosine: lambda must be finite");
  return SamplingFunction(Cosine{lambda});
}

SamplingFunction SamplingFunction::trig(TrigPolynomial poly) {
  return SamplingFunction(std::move(poly));
}

SamplingFunction SamplingFunction::constant(double c) {
  return SamplingFunction(TrigPolynomial::constant(c));
}

SamplingFunction SamplingFunction::weierstrass(double gamma, int depth) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw PreconditionError("weierstrass: gamma must lie in (0, 1]");
  }
  if (depth < 0 || depth > 52) throw PreconditionError("weierstrass: depth must lie in [0, 52]");
  return SamplingFunction(Weierstrass{gamma, depth});
}

SamplingFunction SamplingFunction::scaled(double scale, SamplingFunction inner) {
  return SamplingFunction(
      Scaled{scale, std::make_shared<const SamplingFunction>(std::move(inner))});
}

SamplingFunction SamplingFunction::shifted(double shift, SamplingFunction inner) {
  return SamplingFunction(
      Shifted{shift, std::make_shared<const SamplingFunction>(std::move(inner))});
}

double SamplingFunction::operator()(double theta) const {
  const double x = frac(theta);
  return std::visit(
      [x](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Cosine>) {
          return 2.0 * v.lambda * std::cos(kTwoPi * x);
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          return v(x);
        } else if constexpr (std::is_same_v<T, Weierstrass>) {
          double s = 0.0;
          double y = x;  // 2^j x mod 1, exact since doubling is exact
          for (int j = 0; j <= v.depth; ++j) {
            s += std::exp2(-v.gamma * j) * std::cos(kTwoPi * y);
            y = frac(2.0 * y);
          }
          return s;
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return v.scale * (*v.inner)(x);
        } else {
          return (*v.inner)(x + v.shift);
        }
      },
      kind_);
}

std::optional<int> SamplingFunction::fourier_degree() const {
  return std::visit(
      [](const auto& v) -> std::optional<int> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Cosine>) {
          return 1;
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          return v.degree();
        } else if constexpr (std::is_same_v<T, Weierstrass>) {
          return std::nullopt;
        } else {
          return v.inner->fourier_degree();
        }
      },
      kind_);
}

std::complex<double> SamplingFunction::fourier_coefficient(int j) const {
  return std::visit(
      [j](const auto& v) -> std::complex<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Cosine>) {
          return (j == 1 || j == -1) ? std::complex<double>(v.lambda, 0.0)
                                     : std::complex<double>(0.0, 0.0);
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          return v.coefficient(j);
        } else if constexpr (std::is_same_v<T, Weierstrass>) {
          const long long a = j < 0 ? -static_cast<long long>(j) : j;
          if (a == 0 || (a & (a - 1)) != 0) return {0.0, 0.0};
          const int m = std::countr_zero(static_cast<unsigned long long>(a));
          if (m > v.depth) return {0.0, 0.0};
          return {0.5 * std::exp2(-v.gamma * m), 0.0};
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return v.scale * v.inner->fourier_coefficient(j);
        } else {
          return v.inner->fourier_coefficient(j) * unit_phase(static_cast<double>(j) * v.shift);
        }
      },
      kind_);
}

bool SamplingFunction::is_cosine_family() const {
  if (std::holds_alternative<Cosine>(kind_)) return true;
  if (const auto* s = std::get_if<Scaled>(&kind_)) return s->inner->is_cosine_family();
  return false;
}

nlohmann::json SamplingFunction::to_json() const {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Cosine>) {
          return {{"kind", "cosine"}, {"lambda", v.lambda}};
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          nlohmann::json coeffs = nlohmann::json::array();
          for (const auto& c : v.coefficients()) coeffs.push_back({c.real(), c.imag()});
          return {{"kind", "trigpoly"}, {"coeffs", coeffs}};
        } else if constexpr (std::is_same_v<T, Weierstrass>) {
          return {{"kind", "weierstrass"}, {"gamma", v.gamma}, {"depth", v.depth}};
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return {{"kind", "scaled"}, {"scale", v.scale}, {"inner", v.inner->to_json()}};
        } else {
          return {{"kind", "shifted"}, {"shift", v.shift}, {"inner", v.inner->to_json()}};
        }
      },
      kind_);
}

SamplingFunction SamplingFunction::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("kind")) {
      throw ConfigError("sampling descriptor must be an object with a \"kind\" field");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cosine") return cosine(j.at("lambda").get<double>());
    if (kind == "constant") return constant(j.at("value").get<double>());
    if (kind == "weierstrass") {
      return weierstrass(j.at("gamma").get<double>(),
                         j.value("depth", kDefaultWeierstrassDepth));
    }
    if (kind == "trigpoly") {
      std::vector<std::complex<double>> coeffs;
      for (const auto& c : j.at("coeffs")) {
        if (c.is_number()) {
          coeffs.emplace_back(c.get<double>(), 0.0);
        } else {
          coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
        }
      }
      return trig(TrigPolynomial(std::move(coeffs)));
    }
    if (kind == "scaled") return scaled(j.at("scale").get<double>(), from_json(j.at("inner")));
    if (kind == "shifted") return shifted(j.at("shift").get<double>(), from_json(j.at("inner")));
    throw ConfigError("unknown sampling kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sampling descriptor: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("sampling descriptor: ") + e.what());
  }
}

// ------------------------------------------------------------------ operations

std::vector<std::complex<double>> fourier_coefficients_trapezoid(const SamplingFunction& f,
                                                                 int n, int points) {
  if (n < 0 || points < 1) throw PreconditionError("trapezoid: need n >= 0 and points >= 1");
  std::vector<double> samples(points);
  for (int m = 0; m < points; ++m) samples[m] = f(static_cast<double>(m) / points);
  std::vector<std::complex<double>> out(2 * n + 1);
  for (int j = -n; j <= n; ++j) {
    std::complex<double> s{0.0, 0.0};
    for (int m = 0; m < points; ++m) {
      // e^{-2 pi i j m / M}; the index product is reduced mod M to keep the
      // phase argument small
      const long long r = (static_cast<long long>(j) * m) % points;
      s += samples[m] * std::conj(unit_phase(static_cast<double>(r) / points));
    }
    out[j + n] = s / static_cast<double>(points);
  }
  // enforce exact conjugate symmetry (samples are real)
  for (int j = 1; j <= n; ++j) {
    const auto avg = 0.5 * (out[n + j] + std::conj(out[n - j]));
    out[n + j] = avg;
    out[n - j] = std::conj(avg);
  }
  out[n] = {out[n].real(), 0.0};
  return out;
}

namespace {

TrigPolynomial damp(std::vector<std::complex<double>> coeffs, int n) {
  for (int j = -n; j <= n; ++j) {
    coeffs[j + n] *= 1.0 - std::abs(static_cast<double>(j)) / (n + 1.0);
  }
  return TrigPolynomial(std::move(coeffs));
}

}  // namespace

TrigPolynomial fejer_smooth(const SamplingFunction& f, int n) {
  if (n < 0) throw PreconditionError("fejer_smooth: N must be >= 0");
  std::vector<std::complex<double>> coeffs(2 * n + 1);
  for (int j = -n; j <= n; ++j) coeffs[j + n] = f.fourier_coefficient(j);
  return damp(std::move(coeffs), n);
}

TrigPolynomial fejer_smooth_quadrature(const SamplingFunction& f, int n) {
  if (n < 0) throw PreconditionError("fejer_smooth: N must be >= 0");
  return damp(fourier_coefficients_trapezoid(f, n, 8 * (n + 1)), n);
}

double holder_seminorm(const SamplingFunction& f, double gamma, int grid) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw PreconditionError("holder_seminorm: gamma in (0,1]");
  if (grid < 2) throw PreconditionError("holder_seminorm: grid must be >= 2");
  std::vector<double> v(grid);
  for (int i = 0; i < grid; ++i) v[i] = f(static_cast<double>(i) / grid);
  double best = 0.0;
  for (int s = 1; 2 * s <= grid; s *= 2) {
    const double d = std::pow(static_cast<double>(s) / grid, gamma);
    for (int i = 0; i < grid; ++i) {
      best = std::max(best, std::abs(v[i] - v[(i + s) % grid]) / d);
    }
  }
  return best;
}

double sup_distance(const SamplingFunction& f, const SamplingFunction& g, int grid) {
  if (grid < 1) throw PreconditionError("sup_distance: grid must be >= 1");
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    best = std::max(best, std::abs(f(x) - g(x)));
  }
  return best;
}

}  // namespace quasispec
