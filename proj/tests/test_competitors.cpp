#include <cmath>

#include <gtest/gtest.h>

#include "raptt/competitors.hpp"
#include "raptt/covariance.hpp"
#include "raptt/simharness.hpp"

using namespace raptt;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

double leave_two_out_brute(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) continue;
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
      for (Eigen::Index l = 0; l < n; ++l)
        if (l != j && l != k) mean += x.row(l);
      mean /= static_cast<double>(n - 2);
      acc += (x.row(j) - mean).dot(x.row(k)) * (x.row(k) - mean).dot(x.row(j));
    }
  return acc / static_cast<double>(n * (n - 1));
}

}  // namespace

TEST(BS, HandComputedP1) {
  const SufficientStats s = summarize(DataMatrix(col({1, 2, 3})), DataMatrix(col({2, 4})));
  // n = 3, n1 n2/(n1+n2) = 6/5, ||d||^2 = 1, tr S = 4/3, tr S^2 = 16/9.
  const double n = 3.0;
  const double num = 1.2 * 1.0 - 4.0 / 3.0;
  const double var = 2.0 * n * (n + 1) / ((n + 2) * (n - 1)) * (16.0 / 9.0 - (16.0 / 9.0) / n);
  EXPECT_NEAR(bs_test(s).statistic, num / std::sqrt(var), 1e-10);
}

TEST(CQ, NumeratorBruteForce) {
  const Eigen::MatrixXd x = gaussian_matrix(4, 2, StreamKey(1).child("x"));
  const Eigen::MatrixXd y = gaussian_matrix(4, 2, StreamKey(1).child("y"));
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i != j) xx += x.row(i).dot(x.row(j));
      if (i != j) yy += y.row(i).dot(y.row(j));
      xy += x.row(i).dot(y.row(j));
    }
  EXPECT_NEAR(cq_numerator(x, y), xx / 12.0 + yy / 12.0 - 2.0 * xy / 16.0, 1e-10);
}

TEST(CQ, TraceEstimatorsBruteForce) {
  const Eigen::MatrixXd x = gaussian_matrix(6, 3, StreamKey(2).child("x"));
  const Eigen::MatrixXd y = gaussian_matrix(5, 3, StreamKey(2).child("y"));
  const ChenQinTraces t = chen_qin_traces(x, y);
  EXPECT_NEAR(t.tr_s1_sq, leave_two_out_brute(x), 1e-10);
  EXPECT_NEAR(t.tr_s2_sq, leave_two_out_brute(y), 1e-10);
  double cross = 0.0;
  for (Eigen::Index l = 0; l < 6; ++l)
    for (Eigen::Index k = 0; k < 5; ++k) {
      const Eigen::RowVectorXd xbar = (x.colwise().sum() - x.row(l)) / 5.0;
      const Eigen::RowVectorXd ybar = (y.colwise().sum() - y.row(k)) / 4.0;
      cross += (x.row(l) - xbar).dot(y.row(k)) * (y.row(k) - ybar).dot(x.row(l));
    }
  EXPECT_NEAR(t.tr_s1_s2, cross / 30.0, 1e-10);
}

TEST(CQ, SymmetricInGroups) {
  const DataMatrix x(gaussian_matrix(7, 5, StreamKey(3).child("x")));
  const DataMatrix y(gaussian_matrix(9, 5, StreamKey(3).child("y")));
  EXPECT_NEAR(cq_numerator(x.values(), y.values()), cq_numerator(y.values(), x.values()), 1e-12);
  EXPECT_NEAR(cq_test(x, y).statistic, cq_test(y, x).statistic, 1e-12);
  EXPECT_THROW(cq_test(DataMatrix(Eigen::MatrixXd::Ones(3, 5)), y), DomainError);
}

TEST(Competitors, RotationInvariance) {
  const Eigen::MatrixXd x = gaussian_matrix(10, 8, StreamKey(4).child("x"));
  Eigen::MatrixXd y = gaussian_matrix(12, 8, StreamKey(4).child("y"));
  y.array() += 0.3;
  const Eigen::MatrixXd u = haar_projection(8, 8, StreamKey(4).child("u")).to_dense();
  const DataMatrix dx(x), dy(y), rx(x * u), ry(y * u);
  EXPECT_NEAR(bs_test(summarize(dx, dy)).statistic, bs_test(summarize(rx, ry)).statistic, 1e-10);
  EXPECT_NEAR(cq_test(dx, dy).statistic, cq_test(rx, ry).statistic, 1e-10);
}

TEST(SD, ScaleInvariance) {
  const Eigen::MatrixXd x = gaussian_matrix(10, 30, StreamKey(5).child("x"));
  Eigen::MatrixXd y = gaussian_matrix(12, 30, StreamKey(5).child("y"));
  y.array() += 0.2;
  Eigen::VectorXd scales(30);
  for (Eigen::Index j = 0; j < 30; ++j) scales(j) = 0.1 + 0.7 * static_cast<double>(j);
  const double a = sd_test(summarize(DataMatrix(x), DataMatrix(y))).statistic;
  const double b = sd_test(summarize(DataMatrix(x * scales.asDiagonal()), DataMatrix(y * scales.asDiagonal()))).statistic;
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));
}

TEST(SD, ZeroVarianceCoordinate) {
  Eigen::MatrixXd x = gaussian_matrix(6, 4, StreamKey(6).child("x"));
  Eigen::MatrixXd y = gaussian_matrix(6, 4, StreamKey(6).child("y"));
  x.col(2).setConstant(1.0);
  y.col(2).setConstant(3.0);
  EXPECT_THROW(sd_test(summarize(DataMatrix(x), DataMatrix(y))), DomainError);
}

TEST(Competitors, ReportThreshold) {
  const TestReport r = asymptotic_report("BS", normal_reference(2.0), 0.05, 3, 4, 5);
  EXPECT_NEAR(r.threshold, 1.6448536269514722, 1e-12);
  EXPECT_TRUE(r.reject);
  EXPECT_NEAR(r.pvalue, 0.022750131948179195, 1e-14);
}

TEST(Competitors, NullSizesAtSimulationDesign) {
  const Eigen::Index p = 200;
  const CovarianceSpec sigma = make_sigma(1, p);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
  const int runs = 1000;
  int bs = 0, sd = 0, cq = 0;
  for (int i = 0; i < runs; ++i) {
    const StreamKey key = StreamKey(7).child("run", static_cast<std::uint64_t>(i));
    const DataMatrix x = sample_dataset(50, zero, sigma, key.child("x"));
    const DataMatrix y = sample_dataset(50, zero, sigma, key.child("y"));
    const SufficientStats s = summarize(x, y);
    bs += bs_test(s).rejects(0.05);
    sd += sd_test(s).rejects(0.05);
    cq += cq_test(x, y).rejects(0.05);
  }
  EXPECT_NEAR(bs / static_cast<double>(runs), 0.062, 0.025);
  EXPECT_NEAR(sd / static_cast<double>(runs), 0.058, 0.025);
  EXPECT_NEAR(cq / static_cast<double>(runs), 0.05, 0.025);
}
