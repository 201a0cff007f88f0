#pragma once

// Goodness-of-fit helpers used by the simulation checks: Kolmogorov-Smirnov
// tests (one-sample against Uniform(0,1), two-sample, k-sample via pairwise
// comparisons) and Clopper-Pearson intervals for rejection rates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "raptt/error.hpp"
#include "raptt/specfun.hpp"

namespace raptt {

struct KsResult {
  double d = 0.0;
  double pvalue = 1.0;
};

// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // sum below is alternating and ill-conditioned here; the sf is 1 - O(1e-20)
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {
// Stephens' finite-sample correction on the effective sample size.
inline double ks_pvalue(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  return kolmogorov_sf((s + 0.12 + 0.11 / s) * d);
}
}  // namespace detail

inline KsResult ks_uniform(std::vector<double> u) {
  detail::require(!u.empty(), "ks_uniform: empty sample");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = std::clamp(u[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - v, v - static_cast<double>(i) / n});
  }
  return KsResult{d, detail::ks_pvalue(d, n)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return KsResult{d, detail::ks_pvalue(d, na * nb / (na + nb))};
}

struct HomogeneityResult {
  double max_d = 0.0;
  double min_pvalue = 1.0;
  double adjusted_pvalue = 1.0;  // Bonferroni over all pairs

  [[nodiscard]] bool passes(double level) const { return adjusted_pvalue >= level; }
};

// k-sample homogeneity through all pairwise two-sample KS tests.
inline HomogeneityResult ks_homogeneity(const std::vector<std::vector<double>>& samples) {
  detail::require(samples.size() >= 2, "ks_homogeneity: need at least two samples");
  HomogeneityResult out;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const KsResult r = ks_two_sample(samples[a], samples[b]);
      out.max_d = std::max(out.max_d, r.d);
      out.min_pvalue = std::min(out.min_pvalue, r.pvalue);
      ++pairs;
    }
  }
  out.adjusted_pvalue = std::min(1.0, out.min_pvalue * static_cast<double>(pairs));
  return out;
}

// Exact (Clopper-Pearson) interval for a binomial proportion.
inline std::pair<double, double> binomial_interval(long successes, long trials, double level = 0.95) {
  detail::require(trials >= 1 && successes >= 0 && successes <= trials,
                  "binomial_interval: need 0 <= successes <= trials, trials >= 1");
  detail::require(level > 0.0 && level < 1.0, "binomial_interval: level must lie in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  const auto x = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  // Lower bound: Beta(x, n-x+1) quantile at tail. Upper: 1 - Beta(n-x, x+1) quantile at tail.
  const double lo = successes == 0 ? 0.0 : detail::ibeta_inv_lower(tail, x, n - x + 1.0).first;
  const double hi = successes == trials ? 1.0 : 1.0 - detail::ibeta_inv_lower(tail, n - x, x + 1.0).first;
  return {lo, hi};
}

}  // namespace raptt
