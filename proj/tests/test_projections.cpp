#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "raptt/gof.hpp"
#include "raptt/projections.hpp"

using namespace raptt;

TEST(HaarProjection, SemiOrthogonal) {
  for (auto [p, k] : {std::pair{5, 2}, {200, 43}, {30, 30}, {1, 1}}) {
    const ProjectionMatrix r = haar_projection(p, k, StreamKey(1).child("h", p));
    const Eigen::MatrixXd rd = r.to_dense();
    EXPECT_LT((rd.transpose() * rd - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HaarProjection, AngleUniformOnCircle) {
  const int draws = 100000;
  const int bins = 36;
  std::vector<long> counts(bins, 0);
  for (int i = 0; i < draws; ++i) {
    const Eigen::MatrixXd r = haar_projection(2, 1, StreamKey(2).child("c", static_cast<std::uint64_t>(i))).to_dense();
    double angle = std::atan2(r(1, 0), r(0, 0));
    if (angle < 0) angle += 2.0 * std::numbers::pi;
    ++counts[std::min(bins - 1, static_cast<int>(angle / (2.0 * std::numbers::pi) * bins))];
  }
  const double expected = static_cast<double>(draws) / bins;
  double chi2 = 0.0;
  for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared_distribution<double> dist(bins - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001) << chi2;
}

TEST(HaarProjection, RotationalInvariance) {
  // ||v'R|| and ||(Uv)'R|| have the same law for orthogonal U.
  const Eigen::MatrixXd u = haar_projection(5, 5, StreamKey(3).child("U")).to_dense();
  Eigen::VectorXd v(5);
  v << 1, 0, 0, 0, 0;
  const Eigen::VectorXd uv = u * v;
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(haar_projection(5, 2, StreamKey(3).child("a", static_cast<std::uint64_t>(i))).project(v).norm());
    b.push_back(haar_projection(5, 2, StreamKey(3).child("b", static_cast<std::uint64_t>(i))).project(uv).norm());
  }
  EXPECT_GT(ks_two_sample(a, b).pvalue, 0.001);
}

TEST(BlockProjection, SemiOrthogonalAcrossDraws) {
  for (int i = 0; i < 1000; ++i) {
    const ProjectionMatrix r = block_projection(57, 9, StreamKey(4).child("b", static_cast<std::uint64_t>(i)));
    const Eigen::MatrixXd rd = r.to_dense();
    ASSERT_LT((rd.transpose() * rd - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BlockProjection, StructureP4K2) {
  const Eigen::MatrixXd r = block_projection(4, 2, StreamKey(5)).to_dense();
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ((r.row(i).array() != 0.0).count(), 1);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_EQ((r.col(j).array() != 0.0).count(), 2);
    EXPECT_NEAR(r.col(j).norm(), 1.0, 1e-14);
  }
}

TEST(BlockProjection, UnevenBlockSizes) {
  EXPECT_EQ(block_sizes(10, 3), (std::vector<Eigen::Index>{4, 3, 3}));
  const Eigen::MatrixXd r = block_projection(10, 3, StreamKey(6)).to_dense();
  std::multiset<long> sizes;
  for (Eigen::Index j = 0; j < 3; ++j) sizes.insert((r.col(j).array() != 0.0).count());
  EXPECT_EQ(sizes, (std::multiset<long>{3, 3, 4}));
}

TEST(BlockProjection, SparseProductsMatchDense) {
  const ProjectionMatrix r = block_projection(23, 4, StreamKey(7));
  const Eigen::MatrixXd rd = r.to_dense();
  const Eigen::MatrixXd m = gaussian_matrix(6, 23, StreamKey(7).child("m"));
  const Eigen::VectorXd v = gaussian_matrix(23, 1, StreamKey(7).child("v")).col(0);
  EXPECT_LT((r.right_multiply(m) - m * rd).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((r.project(v) - rd.transpose() * v).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Projections, Deterministic) {
  const StreamKey k = StreamKey(8).child("d");
  EXPECT_EQ(haar_projection(12, 3, k).to_dense(), haar_projection(12, 3, k).to_dense());
  EXPECT_EQ(block_projection(12, 3, k).to_dense(), block_projection(12, 3, k).to_dense());
}

TEST(Projections, RejectBadShapes) {
  EXPECT_THROW(haar_projection(3, 4, StreamKey(1)), DomainError);
  EXPECT_THROW(block_projection(3, 0, StreamKey(1)), DomainError);
  EXPECT_THROW(parse_projection_kind("gauss"), DomainError);
}
