#include "quasispec/rotation_cf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "quasispec/errors.hpp"

namespace quasispec {

double frac(double x) {
  const double f = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  return f >= 1.0 ? 0.0 : f;
}

double dist_to_integers(double x) {
  const double f = frac(x);
  return std::min(f, 1.0 - f);
}

namespace {

std::int64_t checked_step(std::int64_t a, std::int64_t x1, std::int64_t x0) {
  std::int64_t prod = 0;
  std::int64_t sum = 0;
  if (__builtin_mul_overflow(a, x1, &prod) || __builtin_add_overflow(prod, x0, &sum)) {
    throw NumericalError("continued fraction convergent overflows 64-bit integers");
  }
  return sum;
}

}  // namespace

ContinuedFraction ContinuedFraction::expand(double x, int max_terms, double tol) {
  if (!std::isfinite(x)) throw PreconditionError("cf_expand: non-finite input");
  if (max_terms < 1) throw PreconditionError("cf_expand: max_terms must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("cf_expand: tol must be > 0");

  ContinuedFraction cf;
  cf.value_ = frac(x);
  double r = cf.value_;
  bool terminated = r < tol;
  while (!terminated && static_cast<int>(cf.quotients_.size()) < max_terms) {
    const double y = 1.0 / r;
    double a = std::floor(y);
    double rem = y - a;
    if (rem > 1.0 - tol) {
      a += 1.0;
      rem = 0.0;
    }
    if (a > 9.0e18) {
      // remainder is float dust; the expansion has effectively terminated
      terminated = true;
      break;
    }
    cf.quotients_.push_back(static_cast<std::int64_t>(a));
    if (rem < tol) terminated = true;
    r = rem;
  }
  if (terminated) {
    if (cf.quotients_.empty()) {
      cf.exact_ = std::make_pair<std::int64_t, std::int64_t>(0, 1);
    } else {
      const auto list = approximants(cf);
      cf.exact_ = std::make_pair(list.back().p, list.back().q);
    }
  }
  return cf;
}

ContinuedFraction ContinuedFraction::from_quotients(std::vector<std::int64_t> quotients,
                                                    bool terminates) {
  for (auto a : quotients) {
    if (a < 1) throw PreconditionError("continued fraction quotients must be >= 1");
  }
  ContinuedFraction cf;
  cf.quotients_ = std::move(quotients);
  long double v = 0.0L;
  for (auto it = cf.quotients_.rbegin(); it != cf.quotients_.rend(); ++it) {
    v = 1.0L / (static_cast<long double>(*it) + v);
  }
  cf.value_ = static_cast<double>(v);
  if (terminates) {
    if (cf.quotients_.empty()) {
      cf.exact_ = std::make_pair<std::int64_t, std::int64_t>(0, 1);
    } else {
      const auto list = approximants(cf);
      cf.exact_ = std::make_pair(list.back().p, list.back().q);
    }
  }
  return cf;
}

ContinuedFraction ContinuedFraction::golden_mean(int terms) {
  if (terms < 1) throw PreconditionError("golden_mean: terms must be >= 1");
  ContinuedFraction cf = from_quotients(std::vector<std::int64_t>(terms, 1));
  cf.value_ = (std::sqrt(5.0) - 1.0) / 2.0;
  return cf;
}

double ContinuedFraction::reconstruct() const {
  double v = 0.0;
  for (auto it = quotients_.rbegin(); it != quotients_.rend(); ++it) {
    v = 1.0 / (static_cast<double>(*it) + v);
  }
  return v;
}

std::vector<Approximant> approximants(const ContinuedFraction& cf) {
  std::vector<Approximant> out;
  out.reserve(cf.quotients().size());
  std::int64_t p_prev = 1, q_prev = 0;  // n = -1
  std::int64_t p = 0, q = 1;            // n = 0
  int n = 0;
  for (auto a : cf.quotients()) {
    const std::int64_t p_next = checked_step(a, p, p_prev);
    const std::int64_t q_next = checked_step(a, q, q_prev);
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
    out.push_back(Approximant{p, q, ++n});
  }
  return out;
}

std::int64_t previous_denominator(const std::vector<Approximant>& list, std::size_t i) {
  if (i >= list.size()) throw PreconditionError("previous_denominator: index out of range");
  return i == 0 ? 1 : list[i - 1].q;
}

DiophantineReport diophantine_check(const ContinuedFraction& cf, double kappa,
                                    std::int64_t n_max) {
  if (n_max < 1) throw PreconditionError("diophantine_check: n_max must be >= 1");
  if (kappa < 0.0) throw PreconditionError("diophantine_check: kappa must be >= 0");
  if (cf.is_rational()) {
    throw PreconditionError("diophantine_check: frequency is rational");
  }
  const double w = cf.value();
  DiophantineReport report;
  report.kappa = kappa;
  report.verified_up_to = n_max;
  report.c_lower = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double c = dist_to_integers(nd * w) * std::pow(nd, 1.0 + kappa);
    if (c < report.c_lower) {
      report.c_lower = c;
      report.argmin = n;
    }
  }
  return report;
}

bool CircleInterval::contains(double x) const { return frac(x - left) <= length(); }

std::int64_t orbit_hits_interval(double theta, double omega, const Approximant& approx,
                                 std::int64_t prev_q, const CircleInterval& interval) {
  if (approx.q < 1 || prev_q < 1) {
    throw PreconditionError("orbit_hits_interval: denominators must be positive");
  }
  const double len = interval.length();
  if (!(len > 1.0 / static_cast<double>(approx.q))) {
    throw PreconditionError("orbit_hits_interval: interval length " + std::to_string(len) +
                            " is not longer than 1/q_n = 1/" + std::to_string(approx.q));
  }
  if (len >= 1.0) return 0;
  const std::int64_t bound = approx.q + prev_q - 1;
  for (std::int64_t j = 0; j <= bound; ++j) {
    if (interval.contains(theta + static_cast<double>(j) * omega)) return j;
  }
  throw NumericalError("orbit_hits_interval: no hit within q_n + q_{n-1} - 1 steps; "
                       "is p_n/q_n an approximant of omega?");
}

}  // namespace quasispec
