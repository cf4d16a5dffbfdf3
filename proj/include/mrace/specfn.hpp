#pragma once

// Scalar special functions: log-gamma, regularized incomplete beta and gamma
// functions, Poisson and standard normal CDFs, multivariate beta.
//
// All functions are pure and reentrant. Prefactors of the form
// x^a e^-x / Gamma(a) and x^a (1-x)^b / B(a,b) are evaluated through the
// Stirling remainder so that large parameters do not lose accuracy to
// cancellation between terms of size a*log(x).

#include <math.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "mrace/error.hpp"

namespace mrace::specfn {

inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite");
  }
#if defined(__GLIBC__)
  int sign = 0;  // lgamma_r does not touch the global signgam
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace detail {

inline constexpr double kLnSqrt2Pi = 0.91893853320467274178;
inline constexpr double kFpMin = 1e-300;
inline constexpr double kCfEps = 4e-16;
inline constexpr int kMaxIter = 100000;

// lgamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)]
inline double stirling_remainder(double x) {
  if (x < 10.0) {
    return log_gamma(x) - ((x - 0.5) * std::log(x) - x + kLnSqrt2Pi);
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 / 156.0))))));
}

// log(1 + t) - t without cancellation for small |t|.
inline double log1pmx(double t) {
  if (std::fabs(t) > 0.25) {
    return std::log1p(t) - t;
  }
  double power = t;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    power *= -t;
    const double term = power / k;
    sum += term;
    if (std::fabs(term) <= 1e-17 * std::fabs(sum)) {
      break;
    }
  }
  return sum;
}

// ln(x^a e^-x / Gamma(a)) for a > 0, x >= 0.
inline double log_gamma_prefix(double a, double x) {
  if (x == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (a < 10.0) {
    return a * std::log(x) - x - log_gamma(a);
  }
  const double t = (x - a) / a;
  return a * log1pmx(t) + 0.5 * std::log(a) - kLnSqrt2Pi - stirling_remainder(a);
}

// lgamma(a + b) - lgamma(b) for b >= 10.
inline double log_gamma_ratio(double a, double b) {
  return (b - 0.5) * std::log1p(a / b) + a * std::log(a + b) - a + stirling_remainder(a + b) -
         stirling_remainder(b);
}

// ln(x^a y^b / B(a, b)) with y = 1 - x supplied separately so that whichever
// of x, y is small is used exactly.
inline double log_beta_prefix(double x, double y, double a, double b) {
  const double lx = x < 0.5 ? std::log(x) : std::log1p(-y);
  const double ly = x < 0.5 ? std::log1p(-x) : std::log(y);
  if (a >= 10.0 && b >= 10.0) {
    const double d = x * b - y * a;
    const double corr = stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(a + b);
    return a * log1pmx(d / a) + b * log1pmx(-d / b) + 0.5 * std::log(a * b / (a + b)) -
           kLnSqrt2Pi - corr;
  }
  if (b >= 10.0) {
    return a * lx + b * ly - log_gamma(a) + log_gamma_ratio(a, b);
  }
  if (a >= 10.0) {
    return a * lx + b * ly - log_gamma(b) + log_gamma_ratio(b, a);
  }
  return a * lx + b * ly - (log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEps) {
      return h;
    }
  }
  throw ConvergenceError("reg_inc_beta: continued fraction did not converge");
}

// I_x(a, b) assuming x <= a / (a + b), y = 1 - x.
inline double inc_beta_lower(double x, double y, double a, double b) {
  const double prefix = log_beta_prefix(x, y, a, b);
  if (prefix < -745.0) {
    return 0.0;
  }
  return std::exp(prefix) * beta_continued_fraction(x, a, b) / a;
}

// Series for the lower regularized gamma function, valid for x < a + 1.
inline double gamma_p_series(double x, double a) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) {
      return std::min(1.0, sum * std::exp(log_gamma_prefix(a, x)));
    }
  }
  throw ConvergenceError("gamma_cdf: series did not converge");
}

// Continued fraction for the upper regularized gamma function, valid for x >= a + 1.
inline double gamma_q_fraction(double x, double a) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEps) {
      return std::min(1.0, std::exp(log_gamma_prefix(a, x)) * h);
    }
  }
  throw ConvergenceError("gamma_sf: continued fraction did not converge");
}

inline void check_gamma_args(double x, double shape, const char* who) {
  if (!(shape > 0.0) || !std::isfinite(shape) || std::isnan(x) || x < 0.0) {
    throw DomainError(std::string(who) + ": need x >= 0 and shape > 0");
  }
}

inline bool small_integer(double v) { return v <= 64.0 && v == std::floor(v); }

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) ||
      !std::isfinite(b)) {
    throw DomainError("reg_inc_beta: need 0 <= x <= 1, a > 0, b > 0");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double y = 1.0 - x;
  if (x > a / (a + b)) {
    return 1.0 - detail::inc_beta_lower(y, x, b, a);
  }
  return detail::inc_beta_lower(x, y, a, b);
}

/// P(G > x) for G ~ Gamma(shape, scale 1).
inline double gamma_sf(double x, double shape) {
  detail::check_gamma_args(x, shape, "gamma_sf");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (detail::small_integer(shape) && x <= 600.0) {
    // Finite Poisson sum: P(G > x) = P(Pois(x) < shape).
    double term = 1.0;
    double sum = 1.0;
    const int n = static_cast<int>(shape);
    for (int j = 1; j < n; ++j) {
      term *= x / j;
      sum += term;
    }
    return std::min(1.0, std::exp(-x) * sum);
  }
  if (x < shape + 1.0) {
    return 1.0 - detail::gamma_p_series(x, shape);
  }
  return detail::gamma_q_fraction(x, shape);
}

/// P(G <= x) for G ~ Gamma(shape, scale 1).
inline double gamma_cdf(double x, double shape) {
  detail::check_gamma_args(x, shape, "gamma_cdf");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < shape + 1.0) {
    return detail::gamma_p_series(x, shape);
  }
  return 1.0 - detail::gamma_q_fraction(x, shape);
}

/// P(P <= k) for P ~ Poisson(lambda).
inline double poisson_cdf(std::int64_t k, double lambda) {
  if (k < 0) {
    throw DomainError("poisson_cdf: k must be nonnegative");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("poisson_cdf: lambda must be positive and finite");
  }
  if (lambda > 1e4) {
    return gamma_sf(lambda, static_cast<double>(k) + 1.0);
  }
  // Sum outward from the largest included term, scaled by that term.
  const auto j0 = std::min<std::int64_t>(k, static_cast<std::int64_t>(std::floor(lambda)));
  const double log_t0 =
      detail::log_gamma_prefix(static_cast<double>(j0) + 1.0, lambda) - std::log(lambda);
  double sum = 1.0;
  double t = 1.0;
  for (std::int64_t j = j0; j > 0; --j) {
    t *= static_cast<double>(j) / lambda;
    sum += t;
    if (t < 1e-17 * sum) break;
  }
  t = 1.0;
  for (std::int64_t j = j0 + 1; j <= k; ++j) {
    t *= lambda / static_cast<double>(j);
    sum += t;
    if (t < 1e-17 * sum) break;
  }
  return std::min(1.0, std::exp(log_t0) * sum);
}

inline double std_normal_cdf(double z) {
  if (!std::isfinite(z)) {
    throw DomainError("std_normal_cdf: argument must be finite");
  }
  return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

inline double std_normal_pdf(double z) {
  return 0.39894228040143267794 * std::exp(-0.5 * z * z);
}

/// ln B(n_1, ..., n_m) = sum ln Gamma(n_k) - ln Gamma(sum n_k).
inline double log_mv_beta(std::span<const double> n) {
  if (n.size() < 2) {
    throw DomainError("log_mv_beta: need at least two parameters");
  }
  double total = 0.0;
  double acc = 0.0;
  for (double v : n) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("log_mv_beta: parameters must be positive");
    }
    total += v;
    acc += log_gamma(v);
  }
  return acc - log_gamma(total);
}

/// Probe of the map nm -> I_{(n1+N)/(n1+N+nm)}(n1+K, nm), which is strictly
/// increasing in nm for 0 <= K <= N.
struct BetaMonotoneProbe {
  double n1 = 1.0;
  double K = 0.0;
  double N = 0.0;
  int nm = 1;

  [[nodiscard]] bool valid() const { return n1 > 0.0 && K >= 0.0 && K <= N && nm >= 1; }

  [[nodiscard]] double value() const {
    if (!valid()) {
      throw DomainError("BetaMonotoneProbe: need n1 > 0, 0 <= K <= N, nm >= 1");
    }
    return reg_inc_beta((n1 + N) / (n1 + N + nm), n1 + K, static_cast<double>(nm));
  }
};

}  // namespace mrace::specfn
