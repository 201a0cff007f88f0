#pragma once

// Two-sample data containers and sufficient statistics.
//
// The pooled covariance S = Z'Z / n is kept in factored form through the
// group-centered rows Z; with p in the thousands and n in the tens, every
// downstream quantity goes through n-sized Gram objects instead.

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "raptt/error.hpp"
#include "raptt/projections.hpp"

namespace raptt {

// n x p sample, one observation per row.
class DataMatrix {
 public:
  DataMatrix() = default;

  explicit DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2)
      throw DomainError("data matrix needs at least 2 observations, got " +
                        std::to_string(values_.rows()));
    if (values_.cols() < 1) throw DomainError("data matrix has no columns");
    if (!values_.allFinite()) throw DomainError("data matrix contains non-finite entries");
  }

  [[nodiscard]] Eigen::Index n() const { return values_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return values_.cols(); }
  [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

class SufficientStats {
 public:
  SufficientStats(Eigen::VectorXd mean_x, Eigen::VectorXd mean_y, Eigen::MatrixXd centered,
                  Eigen::Index n1, Eigen::Index n2)
      : mean_x_(std::move(mean_x)),
        mean_y_(std::move(mean_y)),
        centered_(std::move(centered)),
        n1_(n1),
        n2_(n2) {
    if (mean_x_.size() != mean_y_.size() || centered_.cols() != mean_x_.size())
      throw DimensionMismatch("sufficient statistics: inconsistent dimensions");
    if (n1_ < 2 || n2_ < 2) throw DomainError("each group needs at least 2 observations");
  }

  [[nodiscard]] const Eigen::VectorXd& mean_x() const { return mean_x_; }
  [[nodiscard]] const Eigen::VectorXd& mean_y() const { return mean_y_; }
  [[nodiscard]] Eigen::VectorXd diff() const { return mean_x_ - mean_y_; }
  // Rows whose cross-product over n is the pooled covariance. For stats
  // built from data these are the n1 + n2 group-centered observations.
  [[nodiscard]] const Eigen::MatrixXd& centered() const { return centered_; }
  [[nodiscard]] Eigen::Index n1() const { return n1_; }
  [[nodiscard]] Eigen::Index n2() const { return n2_; }
  // Pooled degrees of freedom n1 + n2 - 2.
  [[nodiscard]] Eigen::Index n() const { return n1_ + n2_ - 2; }
  [[nodiscard]] Eigen::Index p() const { return mean_x_.size(); }

  // n1 n2 / (n1 + n2)
  [[nodiscard]] double scale() const {
    return static_cast<double>(n1_) * static_cast<double>(n2_) / static_cast<double>(n1_ + n2_);
  }

  // Dense p x p pooled covariance. Only call when p is moderate.
  [[nodiscard]] Eigen::MatrixXd covariance() const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p(), p());
    s.selfadjointView<Eigen::Lower>().rankUpdate(centered_.transpose(), 1.0 / n());
    return s.selfadjointView<Eigen::Lower>();
  }

  // Z Z' / n, same nonzero spectrum as S.
  [[nodiscard]] Eigen::MatrixXd gram() const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(centered_.rows(), centered_.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(centered_, 1.0 / n());
    return g.selfadjointView<Eigen::Lower>();
  }

 private:
  Eigen::VectorXd mean_x_;
  Eigen::VectorXd mean_y_;
  Eigen::MatrixXd centered_;
  Eigen::Index n1_;
  Eigen::Index n2_;
};

inline SufficientStats summarize(const DataMatrix& x, const DataMatrix& y) {
  if (x.p() != y.p())
    throw DimensionMismatch("samples differ in dimension: " + std::to_string(x.p()) + " vs " +
                            std::to_string(y.p()));
  Eigen::VectorXd mx = x.values().colwise().mean().transpose();
  Eigen::VectorXd my = y.values().colwise().mean().transpose();
  Eigen::MatrixXd z(x.n() + y.n(), x.p());
  z.topRows(x.n()) = x.values().rowwise() - mx.transpose();
  z.bottomRows(y.n()) = y.values().rowwise() - my.transpose();
  return SufficientStats(std::move(mx), std::move(my), std::move(z), x.n(), y.n());
}

struct TraceStats {
  double tr_s = 0.0;
  double tr_s2 = 0.0;
  Eigen::VectorXd diag_s;
};

// tr(S), tr(S^2) and diag(S). tr(S^2) = ||Z Z'||_F^2 / n^2, using whichever
// of the two Gram products is smaller.
inline TraceStats trace_stats(const SufficientStats& stats) {
  const Eigen::MatrixXd& z = stats.centered();
  const double n = static_cast<double>(stats.n());
  TraceStats out;
  out.diag_s = z.colwise().squaredNorm().transpose() / n;
  out.tr_s = out.diag_s.sum();
  if (z.rows() <= z.cols()) {
    out.tr_s2 = stats.gram().squaredNorm();
  } else {
    out.tr_s2 = stats.covariance().squaredNorm();
  }
  return out;
}

// Sufficient statistics after right-multiplying the data by R.
struct ProjectedStats {
  Eigen::VectorXd diff;    // R'(Xbar - Ybar)
  Eigen::MatrixXd s_proj;  // R' S R
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
};

namespace detail {

// Shared by project_stats and the fast Monte Carlo paths: projected rows
// zr (rows x k) and projected mean difference.
inline ProjectedStats projected_from_parts(Eigen::VectorXd diff, const Eigen::MatrixXd& zr,
                                           Eigen::Index n1, Eigen::Index n2) {
  ProjectedStats out;
  out.n1 = n1;
  out.n2 = n2;
  out.n = n1 + n2 - 2;
  out.k = diff.size();
  out.diff = std::move(diff);
  out.s_proj = Eigen::MatrixXd::Zero(out.k, out.k);
  out.s_proj.selfadjointView<Eigen::Lower>().rankUpdate(zr.transpose(),
                                                         1.0 / static_cast<double>(out.n));
  out.s_proj = out.s_proj.selfadjointView<Eigen::Lower>();
  return out;
}

}  // namespace detail

inline ProjectedStats project_stats(const SufficientStats& stats, const ProjectionMatrix& r) {
  if (r.p() != stats.p())
    throw DimensionMismatch("projection has p=" + std::to_string(r.p()) + ", data has p=" +
                            std::to_string(stats.p()));
  if (r.k() >= stats.n())
    throw DomainError("projected dimension k=" + std::to_string(r.k()) +
                      " must be smaller than n1+n2-2=" + std::to_string(stats.n()));
  return detail::projected_from_parts(r.project(stats.diff()), r.right_multiply(stats.centered()),
                                      stats.n1(), stats.n2());
}

}  // namespace raptt
