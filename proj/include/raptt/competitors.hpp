#pragma once

// Asymptotically normal high-dimensional mean tests used as baselines:
// Bai-Saranadasa (BS), Chen-Qin (CQ) and Srivastava-Du (SD). Each rejects
// when its statistic is at least the upper-alpha standard normal quantile.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "raptt/calibration.hpp"
#include "raptt/error.hpp"
#include "raptt/linstat.hpp"
#include "raptt/specfun.hpp"

namespace raptt {

struct AsymptoticResult {
  double statistic = 0.0;
  double pvalue = 1.0;  // 1 - Phi(statistic)

  [[nodiscard]] bool rejects(double alpha) const { return statistic >= normal_quantile(1.0 - alpha); }
};

inline AsymptoticResult normal_reference(double statistic) {
  return AsymptoticResult{statistic, normal_sf(statistic)};
}

inline AsymptoticResult bs_test(const SufficientStats& stats) {
  const double n = static_cast<double>(stats.n());
  detail::require(n > 1.0, "BS test needs n1 + n2 - 2 > 1");
  const TraceStats tr = trace_stats(stats);
  const double num = stats.scale() * stats.diff().squaredNorm() - tr.tr_s;
  const double var = 2.0 * n * (n + 1.0) / ((n + 2.0) * (n - 1.0)) * (tr.tr_s2 - tr.tr_s * tr.tr_s / n);
  if (!(var > 0.0)) throw NumericalDegeneracy("BS test: nonpositive variance estimate");
  return normal_reference(num / std::sqrt(var));
}

// Chen-Qin leave-out estimators of tr(Sigma_1^2), tr(Sigma_2^2) and
// tr(Sigma_1 Sigma_2), evaluated from the three Gram matrices.
struct ChenQinTraces {
  double tr_s1_sq = 0.0;
  double tr_s2_sq = 0.0;
  double tr_s1_s2 = 0.0;
};

namespace detail {

// (1/(n(n-1))) sum_{j != k} [X_j'(X_k - Xbar_(j,k))] [X_k'(X_j - Xbar_(j,k))]
// where Xbar_(j,k) omits observations j and k.
inline double leave_two_out_trace(const Eigen::MatrixXd& g) {
  const Eigen::Index n = g.rows();
  const double nm2 = static_cast<double>(n - 2);
  const Eigen::VectorXd rs = g.rowwise().sum();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) continue;
      const double a = g(j, k) - (rs(j) - g(j, j) - g(j, k)) / nm2;
      const double b = g(k, j) - (rs(k) - g(k, k) - g(k, j)) / nm2;
      acc += a * b;
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace detail

inline ChenQinTraces chen_qin_traces(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::Index n1 = x.rows();
  const Eigen::Index n2 = y.rows();
  const Eigen::MatrixXd gxy = x * y.transpose();
  ChenQinTraces out;
  out.tr_s1_sq = detail::leave_two_out_trace(x * x.transpose());
  out.tr_s2_sq = detail::leave_two_out_trace(y * y.transpose());
  const Eigen::VectorXd row = gxy.rowwise().sum();
  const Eigen::RowVectorXd col = gxy.colwise().sum();
  double acc = 0.0;
  for (Eigen::Index l = 0; l < n1; ++l) {
    for (Eigen::Index k = 0; k < n2; ++k) {
      const double g = gxy(l, k);
      const double c = g - (row(l) - g) / static_cast<double>(n2 - 1);  // X_l'(Y_k - Ybar_(k))
      const double e = g - (col(k) - g) / static_cast<double>(n1 - 1);  // Y_k'(X_l - Xbar_(l))
      acc += c * e;
    }
  }
  out.tr_s1_s2 = acc / (static_cast<double>(n1) * static_cast<double>(n2));
  return out;
}

// Diagonal-free U-statistic estimating ||mu_1 - mu_2||^2.
inline double cq_numerator(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const double n1 = static_cast<double>(x.rows());
  const double n2 = static_cast<double>(y.rows());
  const Eigen::VectorXd sx = x.colwise().sum().transpose();
  const Eigen::VectorXd sy = y.colwise().sum().transpose();
  const double xx = sx.squaredNorm() - x.squaredNorm();  // sum_{i != j} X_i'X_j
  const double yy = sy.squaredNorm() - y.squaredNorm();
  const double xy = sx.dot(sy);
  return xx / (n1 * (n1 - 1.0)) + yy / (n2 * (n2 - 1.0)) - 2.0 * xy / (n1 * n2);
}

inline AsymptoticResult cq_test(const DataMatrix& x, const DataMatrix& y) {
  if (x.p() != y.p()) throw DimensionMismatch("CQ test: samples differ in dimension");
  if (x.n() < 4 || y.n() < 4) throw DomainError("CQ test needs at least 4 observations per group");
  const double n1 = static_cast<double>(x.n());
  const double n2 = static_cast<double>(y.n());
  const ChenQinTraces tr = chen_qin_traces(x.values(), y.values());
  const double var = 2.0 / (n1 * (n1 - 1.0)) * tr.tr_s1_sq + 2.0 / (n2 * (n2 - 1.0)) * tr.tr_s2_sq +
                     4.0 / (n1 * n2) * tr.tr_s1_s2;
  if (!(var > 0.0)) throw NumericalDegeneracy("CQ test: nonpositive variance estimate");
  return normal_reference(cq_numerator(x.values(), y.values()) / std::sqrt(var));
}

inline AsymptoticResult sd_test(const SufficientStats& stats) {
  const double n = static_cast<double>(stats.n());
  const double p = static_cast<double>(stats.p());
  detail::require(n > 2.0, "SD test needs n1 + n2 - 2 > 2");
  const TraceStats tr = trace_stats(stats);
  for (Eigen::Index j = 0; j < stats.p(); ++j)
    if (!(tr.diag_s(j) > 0.0))
      throw DomainError("SD test: coordinate " + std::to_string(j) + " has zero sample variance");

  const Eigen::VectorXd d = stats.diff();
  const double quad = (d.array().square() / tr.diag_s.array()).sum();
  // Correlation-scaled rows; tr(R^2) from the smaller Gram product.
  const Eigen::MatrixXd zs = stats.centered() * tr.diag_s.cwiseSqrt().cwiseInverse().asDiagonal();
  const double tr_r2 = (zs.rows() <= zs.cols() ? (zs * zs.transpose()).squaredNorm()
                                               : (zs.transpose() * zs).squaredNorm()) /
                       (n * n);
  const double num = stats.scale() * quad - n * p / (n - 2.0);
  const double var = 2.0 * (tr_r2 - p * p / n) * (1.0 + tr_r2 / std::pow(p, 1.5));
  if (!(var > 0.0)) throw NumericalDegeneracy("SD test: nonpositive variance estimate");
  return normal_reference(num / std::sqrt(var));
}

inline TestReport asymptotic_report(std::string method, const AsymptoticResult& res, double alpha,
                                    Eigen::Index n1, Eigen::Index n2, Eigen::Index p) {
  TestReport out;
  out.method = std::move(method);
  out.statistic = res.statistic;
  out.threshold = normal_quantile(1.0 - alpha);
  out.pvalue = res.pvalue;
  out.reject = res.statistic >= out.threshold;
  out.alpha = alpha;
  out.n1 = n1;
  out.n2 = n2;
  out.p = p;
  return out;
}

}  // namespace raptt
