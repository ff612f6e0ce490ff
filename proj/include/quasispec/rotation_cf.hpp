#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace quasispec {

/// Fractional part in [0, 1).
double frac(double x);

/// Distance from x to the nearest integer, min(frac(x), 1 - frac(x)).
double dist_to_integers(double x);

/// A convergent p_n / q_n of a continued fraction, n >= 1.
struct Approximant {
  std::int64_t p = 0;
  std::int64_t q = 1;
  int index = 0;

  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  friend bool operator==(const Approximant&, const Approximant&) = default;
};

/// Expansion [0; a_1, ..., a_n] of a frequency reduced mod 1.
class ContinuedFraction {
 public:
  static constexpr int kDefaultMaxTerms = 64;
  static constexpr double kDefaultTolerance = 1e-12;

  /// Gauss-map expansion of x mod 1. Stops when the remainder drops below
  /// tol (the value is then declared rational) or after max_terms quotients.
  static ContinuedFraction expand(double x, int max_terms = kDefaultMaxTerms,
                                  double tol = kDefaultTolerance);

  /// Exact mode: the frequency is defined by its quotients. Unless
  /// `terminates` is set the list is read as the head of an irrational
  /// expansion.
  static ContinuedFraction from_quotients(std::vector<std::int64_t> quotients,
                                          bool terminates = false);

  /// [0; 1, 1, 1, ...] with the value (sqrt(5) - 1) / 2.
  static ContinuedFraction golden_mean(int terms = 40);

  double value() const { return value_; }
  const std::vector<std::int64_t>& quotients() const { return quotients_; }
  const std::optional<std::pair<std::int64_t, std::int64_t>>& exact_rational() const {
    return exact_;
  }
  bool is_rational() const { return exact_.has_value(); }

  /// Evaluates [0; a_1, ..., a_n] back to a real.
  double reconstruct() const;

 private:
  double value_ = 0.0;
  std::vector<std::int64_t> quotients_;
  std::optional<std::pair<std::int64_t, std::int64_t>> exact_;
};

/// Convergents p_n/q_n for n = 1..len(quotients), from the two-term
/// recurrence seeded with p_{-1}/q_{-1} = 1/0 and p_0/q_0 = 0/1.
/// Throws NumericalError if a denominator overflows 64 bits.
std::vector<Approximant> approximants(const ContinuedFraction& cf);

/// q_{n-1} for an approximant list entry (q_0 = 1 for the first one).
std::int64_t previous_denominator(const std::vector<Approximant>& list, std::size_t i);

struct DiophantineReport {
  double kappa = 0.0;
  double c_lower = 0.0;             // min over n <= N of ||n w|| n^(1 + kappa)
  std::int64_t verified_up_to = 0;  // N
  std::int64_t argmin = 0;          // n attaining c_lower
};

/// Exhaustive scan of ||n w|| n^(1+kappa) for 1 <= n <= n_max.
DiophantineReport diophantine_check(const ContinuedFraction& cf, double kappa,
                                    std::int64_t n_max);

/// Circle interval [left, right] of length right - left < 1, taken mod 1.
struct CircleInterval {
  double left = 0.0;
  double right = 0.0;

  double length() const { return right - left; }
  bool contains(double x) const;
};

/// Smallest j >= 0 with frac(theta + j omega) in the interval. Requires the
/// interval to be longer than 1/q_n; the returned j is then at most
/// q_n + q_{n-1} - 1 for a genuine approximant of omega. Throws
/// PreconditionError for a short interval and NumericalError if no hit
/// occurs within that bound.
std::int64_t orbit_hits_interval(double theta, double omega, const Approximant& approx,
                                 std::int64_t prev_q, const CircleInterval& interval);

}  // namespace quasispec
