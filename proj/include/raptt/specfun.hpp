#pragma once

// Scalar special functions: incomplete beta, central and noncentral F,
// standard normal. Pure functions, safe to call from any thread.

#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include "raptt/error.hpp"

namespace raptt {

// Degrees of freedom and noncentrality of an F law.
struct FParams {
  double r = 1.0;
  double s = 1.0;
  double delta = 0.0;

  void validate() const {
    detail::require(r > 0.0 && std::isfinite(r), "F numerator df must be positive");
    detail::require(s > 0.0 && std::isfinite(s), "F denominator df must be positive");
    detail::require(delta >= 0.0 && std::isfinite(delta), "noncentrality must be >= 0");
  }
};

namespace detail {

inline double lgamma_pos(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);  // std::lgamma writes the global signgam
#else
  return std::lgamma(x);
#endif
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
// Converges quickly for x < (a+1)/(a+b+2).
inline double beta_cont_frac(double x, double a, double b) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge (a=" +
              std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

// I_x(a,b) (upper=false) or 1 - I_x(a,b) (upper=true), with y = 1 - x
// supplied separately so callers that know it exactly keep full precision.
inline double ibeta(double x, double y, double a, double b, bool upper) {
  if (x <= 0.0) return upper ? 1.0 : 0.0;
  if (y <= 0.0) return upper ? 0.0 : 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) -
                           (lgamma_pos(a) + lgamma_pos(b) - lgamma_pos(a + b));
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * beta_cont_frac(x, a, b) / a;
    return upper ? 1.0 - lower : lower;
  }
  const double tail = front * beta_cont_frac(y, b, a) / b;
  return upper ? tail : 1.0 - tail;
}

// Solve I_x(a,b) = target for x, target in (0, 1/2]. Returns (x, 1 - x).
inline std::pair<double, double> ibeta_inv_lower(double target, double a, double b) {
  const double lbeta = lgamma_pos(a) + lgamma_pos(b) - lgamma_pos(a + b);
  double lo = 0.0;
  double hi = 1.0;
  // Small-x expansion I_x ~ x^a / (a B(a,b)) as starting point.
  double x = std::exp((std::log(target) + std::log(a) + lbeta) / a);
  if (!(x > 0.0 && x < 1.0)) x = 0.5;
  for (int iter = 0; iter < 1000; ++iter) {
    const double f = ibeta(x, 1.0 - x, a, b, false) - target;
    if (f == 0.0) break;
    if (f < 0.0) lo = x; else hi = x;
    const double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
    double next = x - f / std::exp(log_pdf);
    if (!(next > lo && next < hi)) {
      if (lo == 0.0) next = hi * 0.5;
      else if (hi > 2.0 * lo) next = std::sqrt(lo * hi);
      else next = 0.5 * (lo + hi);
    }
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 2e-16 * x || hi - lo <= 2e-16 * x) break;
  }
  return {x, 1.0 - x};
}

}  // namespace detail

inline double log_beta(double a, double b) {
  detail::require(a > 0.0 && b > 0.0, "log_beta requires a, b > 0");
  return detail::lgamma_pos(a) + detail::lgamma_pos(b) - detail::lgamma_pos(a + b);
}

// Regularized incomplete beta I_u(a,b).
inline double reg_inc_beta(double u, double a, double b) {
  detail::require(u >= 0.0 && u <= 1.0, "reg_inc_beta: u must lie in [0,1]");
  detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                  "reg_inc_beta: a and b must be positive");
  return detail::ibeta(u, 1.0 - u, a, b, false);
}

// Central F distribution function F_{r,s}(u) = I_{ru/(ru+s)}(r/2, s/2).
inline double f_cdf(double u, double r, double s) {
  FParams{r, s, 0.0}.validate();
  detail::require(u >= 0.0, "f_cdf: u must be nonnegative");
  if (std::isinf(u)) return 1.0;
  const double ru = r * u;
  return detail::ibeta(ru / (ru + s), s / (ru + s), 0.5 * r, 0.5 * s, false);
}

// Upper tail 1 - F_{r,s}(u), accurate when tiny.
inline double f_sf(double u, double r, double s) {
  FParams{r, s, 0.0}.validate();
  detail::require(u >= 0.0, "f_sf: u must be nonnegative");
  if (std::isinf(u)) return 0.0;
  const double ru = r * u;
  return detail::ibeta(ru / (ru + s), s / (ru + s), 0.5 * r, 0.5 * s, true);
}

// Inverse of f_cdf in its first argument.
inline double f_quantile(double p, double r, double s) {
  FParams{r, s, 0.0}.validate();
  detail::require(p > 0.0 && p < 1.0, "f_quantile: p must lie in (0,1)");
  double x;
  double y;
  if (p <= 0.5) {
    std::tie(x, y) = detail::ibeta_inv_lower(p, 0.5 * r, 0.5 * s);
  } else {
    // 1 - I_x(a,b) = I_{1-x}(b,a)
    std::tie(y, x) = detail::ibeta_inv_lower(1.0 - p, 0.5 * s, 0.5 * r);
  }
  return s * x / (r * y);
}

// Noncentral F distribution function as a Poisson mixture of central F
// laws. Summation starts at the modal Poisson index and walks outward,
// carrying I and its one-step increment by recurrence, until each
// remaining Poisson tail is below 1e-14.
inline double noncentral_f_cdf(double u, double r, double s, double delta) {
  FParams{r, s, delta}.validate();
  detail::require(u >= 0.0, "noncentral_f_cdf: u must be nonnegative");
  if (delta == 0.0) return f_cdf(u, r, s);
  if (u == 0.0) return 0.0;
  if (std::isinf(u)) return 1.0;

  constexpr double kTailTol = 1e-14;
  const double ru = r * u;
  const double x = ru / (ru + s);
  const double y = s / (ru + s);
  const double a = 0.5 * r;
  const double b = 0.5 * s;
  const double lambda = 0.5 * delta;
  const auto mode = static_cast<long>(std::floor(lambda));

  const double w_mode = std::exp(-lambda + mode * std::log(lambda) -
                                 detail::lgamma_pos(mode + 1.0));
  const double i_mode = detail::ibeta(x, y, a + mode, b, false);
  // term(a') = x^a' y^b / (a' B(a',b)) so that I(a'+1) = I(a') - term(a').
  const double am = a + mode;
  const double term_mode =
      std::exp(am * std::log(x) + b * std::log(y) - std::log(am) - log_beta(am, b));

  double sum = w_mode * i_mode;

  // Upward: l = mode+1, mode+2, ...
  {
    double w = w_mode;
    double ib = i_mode;
    double term = term_mode;
    for (long l = mode; l < mode + 1000000; ++l) {
      const double al = a + l;
      ib -= term;
      if (ib < 0.0) ib = 0.0;
      term *= x * (al + b) / (al + 1.0);
      w *= lambda / (l + 1.0);
      sum += w * ib;
      const double q = lambda / (l + 2.0);
      if (q < 1.0 && w * q / (1.0 - q) < kTailTol) break;
    }
  }
  // Downward: l = mode-1, ..., 0
  {
    double w = w_mode;
    double ib = i_mode;
    double term = term_mode;
    for (long l = mode; l > 0; --l) {
      const double al = a + l;
      term *= al / (x * (al - 1.0 + b));
      ib += term;
      if (ib > 1.0) ib = 1.0;
      w *= l / lambda;
      sum += w * ib;
      const double q = (l - 1.0) / lambda;
      if (w * q / (1.0 - q) < kTailTol) break;
    }
  }
  if (sum < 0.0) return 0.0;
  if (sum > 1.0) return 1.0;
  return sum;
}

struct FMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and variance of the noncentral F law (variance needs s > 4).
inline FMoments noncentral_f_moments(double r, double s, double delta) {
  FParams{r, s, delta}.validate();
  if (!(s > 2.0)) throw DomainError("noncentral F mean undefined for s <= 2");
  if (!(s > 4.0)) throw DomainError("noncentral F variance undefined for s <= 4");
  FMoments out;
  out.mean = s * (r + delta) / (r * (s - 2.0));
  const double ratio = s / r;
  out.variance = 2.0 * ratio * ratio *
                 ((r + delta) * (r + delta) + (r + 2.0 * delta) * (s - 2.0)) /
                 ((s - 2.0) * (s - 2.0) * (s - 4.0));
  return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Acklam's rational approximation polished by one Halley step.
inline double normal_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double t = q * q;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * q /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = (p <= 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace raptt
