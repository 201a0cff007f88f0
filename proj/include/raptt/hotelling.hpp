#pragma once

// Classical and random-projection Hotelling statistics, exact p-values,
// projected-dimension selection and single-projection power.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raptt/error.hpp"
#include "raptt/linstat.hpp"
#include "raptt/projections.hpp"
#include "raptt/specfun.hpp"

namespace raptt {

struct SingleProjectionResult {
  double t2 = 0.0;
  double scaled = 0.0;  // ((n - k + 1) / k) * t2 / n, F_{k, n-k+1} under H0
  double pvalue = 1.0;
  Eigen::Index k = 0;
  Eigen::Index n = 0;
};

namespace detail {

// v' A^{-1} v through a Cholesky factorization of A.
inline double spd_quadratic_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& v,
                                 const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalDegeneracy(std::string(what) + " is not positive definite");
  const auto diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 1e-7 * diag.maxCoeff()))
    throw NumericalDegeneracy(std::string(what) + " is numerically singular");
  const Eigen::VectorXd w = llt.matrixL().solve(v);
  return w.squaredNorm();
}

}  // namespace detail

// Hotelling's T^2 on the full data. Undefined unless p < n1 + n2 - 2.
inline double t2_classical(const SufficientStats& stats) {
  if (stats.p() >= stats.n())
    throw UndefinedStatistic("Hotelling T^2 is undefined in high dimension: p=" +
                             std::to_string(stats.p()) + " >= n=" + std::to_string(stats.n()) +
                             " makes the pooled covariance singular");
  try {
    return stats.scale() * detail::spd_quadratic_form(stats.covariance(), stats.diff(),
                                                      "pooled covariance");
  } catch (const NumericalDegeneracy& e) {
    throw UndefinedStatistic(std::string("Hotelling T^2 is undefined: ") + e.what());
  }
}

inline SingleProjectionResult t2_projected(const ProjectedStats& proj) {
  if (proj.k < 1 || proj.k >= proj.n)
    throw DomainError("projected Hotelling test needs 1 <= k < n");
  const double scale = static_cast<double>(proj.n1) * static_cast<double>(proj.n2) /
                       static_cast<double>(proj.n1 + proj.n2);
  SingleProjectionResult out;
  out.k = proj.k;
  out.n = proj.n;
  out.t2 = scale * detail::spd_quadratic_form(proj.s_proj, proj.diff, "projected covariance R'SR");
  const double k = static_cast<double>(proj.k);
  const double df2 = static_cast<double>(proj.n - proj.k + 1);
  out.scaled = df2 / k * out.t2 / static_cast<double>(proj.n);
  out.pvalue = f_sf(out.scaled, k, df2);
  return out;
}

// c_alpha with F_{k, n-k+1}(c_alpha) = 1 - alpha.
inline double critical_value(Eigen::Index k, Eigen::Index n, double alpha) {
  detail::require(k >= 1 && k <= n, "critical_value: need 1 <= k <= n so both df are positive");
  detail::require(alpha > 0.0 && alpha < 1.0, "critical_value: alpha must lie in (0,1)");
  return f_quantile(1.0 - alpha, static_cast<double>(k), static_cast<double>(n - k + 1));
}

// k in {1, ..., n-1} minimizing c_alpha; ties go to the smaller k.
inline Eigen::Index choose_k(Eigen::Index n1, Eigen::Index n2, double alpha) {
  const Eigen::Index n = n1 + n2 - 2;
  detail::require(n >= 2, "choose_k: n1 + n2 - 2 must be at least 2");
  Eigen::Index best = 1;
  double best_c = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double c = critical_value(k, n, alpha);
    if (c < best_c) {
      best_c = c;
      best = k;
    }
  }
  return best;
}

// Delta_R = d' R (R' Sigma R)^{-1} R' d. Sigma is any type with
// multiply(M) returning Sigma * M.
template <class Sigma>
double noncentrality(const Eigen::VectorXd& mu_diff, const Sigma& sigma, const ProjectionMatrix& r) {
  if (mu_diff.size() != r.p()) throw DimensionMismatch("noncentrality: mean difference has wrong length");
  const Eigen::MatrixXd rd = r.to_dense();
  const Eigen::MatrixXd rsr = rd.transpose() * sigma.multiply(rd);
  return detail::spd_quadratic_form(rsr, r.project(mu_diff), "R' Sigma R");
}

namespace detail {
struct DenseSigma {
  const Eigen::MatrixXd& m;
  [[nodiscard]] Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const { return m * x; }
};
}  // namespace detail

inline double noncentrality(const Eigen::VectorXd& mu_diff, const Eigen::MatrixXd& sigma,
                            const ProjectionMatrix& r) {
  if (sigma.rows() != r.p() || sigma.cols() != r.p())
    throw DimensionMismatch("noncentrality: covariance has wrong shape");
  return noncentrality(mu_diff, detail::DenseSigma{sigma}, r);
}

struct PowerInputs {
  double delta_r = 0.0;
  Eigen::Index k = 1;
  Eigen::Index n1 = 2;
  Eigen::Index n2 = 2;
  double alpha = 0.05;
};

enum class PowerRoute {
  noncentral_f,   // 1 - F_{k, n-k+1, delta}(c_alpha)
  poisson_series  // explicit Poisson-weighted incomplete beta sum
};

// Exact power of the level-alpha single-projection test given Delta_R.
inline double power_given_delta(const PowerInputs& in, PowerRoute route = PowerRoute::noncentral_f) {
  detail::require(in.delta_r >= 0.0, "power: Delta_R must be nonnegative");
  detail::require(in.alpha > 0.0 && in.alpha < 1.0, "power: alpha must lie in (0,1)");
  const Eigen::Index n = in.n1 + in.n2 - 2;
  detail::require(in.k >= 1 && in.k < n + 1, "power: need n - k + 1 > 0");
  const double scale = static_cast<double>(in.n1) * static_cast<double>(in.n2) /
                       static_cast<double>(in.n1 + in.n2);
  const double k = static_cast<double>(in.k);
  const double df2 = static_cast<double>(n - in.k + 1);
  const double c = critical_value(in.k, n, in.alpha);
  if (in.delta_r == 0.0) return in.alpha;

  if (route == PowerRoute::noncentral_f) return 1.0 - noncentral_f_cdf(c, k, df2, scale * in.delta_r);

  // Poisson(lambda) weights from l = 0 upward, each computed in log space.
  const double lambda = 0.5 * scale * in.delta_r;
  const double x = k * c / (k * c + df2);
  const double y = df2 / (k * c + df2);
  double mass = 0.0;
  double acc = 0.0;
  for (long l = 0; l < 10000000; ++l) {
    const double w = std::exp(-lambda + l * std::log(lambda) - detail::lgamma_pos(l + 1.0));
    mass += w;
    acc += w * detail::ibeta(x, y, 0.5 * (k + 2.0 * l), 0.5 * df2, false);
    if (l > lambda && (1.0 - mass < 1e-13 || w < 1e-18)) break;
  }
  return 1.0 - acc;
}

}  // namespace raptt
