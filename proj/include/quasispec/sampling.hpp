#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace quasispec {

/// Real trigonometric polynomial sum_{|j|<=N} c_j e^{2 pi i j theta} with
/// c_{-j} = conj(c_j).
class TrigPolynomial {
 public:
  TrigPolynomial() : coeffs_{std::complex<double>(0.0, 0.0)} {}

  /// coeffs holds c_{-N}, ..., c_N (odd length). Throws PreconditionError if
  /// the conjugate symmetry is violated beyond 1e-12 (relative to the
  /// largest coefficient).
  explicit TrigPolynomial(std::vector<std::complex<double>> coeffs);

  static TrigPolynomial constant(double c);

  int degree() const { return static_cast<int>(coeffs_.size() / 2); }
  std::complex<double> coefficient(int j) const;
  const std::vector<std::complex<double>>& coefficients() const { return coeffs_; }

  double operator()(double theta) const;
  /// Full complex sum; the imaginary part is float noise for valid input.
  std::complex<double> evaluate_complex(double theta) const;

  double sup_bound() const;  // sum |c_j|

 private:
  std::vector<std::complex<double>> coeffs_;
};

/// Period-1 potential generator f. Families: 2 lambda cos(2 pi theta),
/// trigonometric polynomial, lacunary Weierstrass sum, and scaled / shifted
/// composites of these.
class SamplingFunction {
 public:
  struct Cosine {
    double lambda;
  };
  struct Weierstrass {
    double gamma;
    int depth;
  };
  struct Scaled {
    double scale;
    std::shared_ptr<const SamplingFunction> inner;
  };
  struct Shifted {
    double shift;
    std::shared_ptr<const SamplingFunction> inner;
  };
  using Kind = std::variant<Cosine, TrigPolynomial, Weierstrass, Scaled, Shifted>;

  static constexpr int kDefaultWeierstrassDepth = 24;

  static SamplingFunction cosine(double lambda);
  static SamplingFunction trig(TrigPolynomial poly);
  static SamplingFunction constant(double c);
  static SamplingFunction zero() { return constant(0.0); }
  static SamplingFunction weierstrass(double gamma, int depth = kDefaultWeierstrassDepth);
  static SamplingFunction scaled(double scale, SamplingFunction inner);
  static SamplingFunction shifted(double shift, SamplingFunction inner);

  /// f(frac(theta)).
  double operator()(double theta) const;

  double holder_gamma() const { return holder_gamma_; }
  /// Upper bound on sup |f|.
  double sup_norm() const { return sup_norm_; }
  /// Degree if f is a trigonometric polynomial, nullopt for rough families.
  std::optional<int> fourier_degree() const;
  /// Closed-form Fourier coefficient f^(j).
  std::complex<double> fourier_coefficient(int j) const;
  /// True when f is a scaled 2 lambda cos(2 pi theta) (extrema of the
  /// rational discriminant fall on grids containing theta = 0).
  bool is_cosine_family() const;

  const Kind& kind() const { return kind_; }

  nlohmann::json to_json() const;
  /// Throws ConfigError on malformed descriptors.
  static SamplingFunction from_json(const nlohmann::json& j);

 private:
  explicit SamplingFunction(Kind k);
  Kind kind_;
  double holder_gamma_ = 1.0;
  double sup_norm_ = 0.0;
};

/// Composite trapezoid rule on M uniform points for f^(j), |j| <= n.
/// Returned in the order j = -n..n.
std::vector<std::complex<double>> fourier_coefficients_trapezoid(const SamplingFunction& f,
                                                                 int n, int points);

/// Fejer mean K_N * f: coefficients (1 - |j|/(N+1)) f^(j), |j| <= N, using
/// closed-form coefficients of the family.
TrigPolynomial fejer_smooth(const SamplingFunction& f, int n);

/// Same damping applied to trapezoid-rule coefficients on 8(N+1) points.
TrigPolynomial fejer_smooth_quadrature(const SamplingFunction& f, int n);

/// Max over grid pairs at dyadic index separations of
/// |f(x) - f(y)| / d(x, y)^gamma, d the circle distance.
double holder_seminorm(const SamplingFunction& f, double gamma, int grid);

/// sup over a uniform grid of |f - g|.
double sup_distance(const SamplingFunction& f, const SamplingFunction& g, int grid);

}  // namespace quasispec
