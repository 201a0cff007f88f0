#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "raptt/parallel.hpp"
#include "raptt/randsrc.hpp"

using namespace raptt;

TEST(StreamKey, PathDeterminesStream) {
  const StreamKey a = StreamKey(5).child("x", 3);
  EXPECT_EQ(a.stream_id(), StreamKey(5).child("x", 3).stream_id());
  EXPECT_NE(a.stream_id(), StreamKey(5).child("x", 4).stream_id());
  EXPECT_NE(a.stream_id(), StreamKey(5).child("y", 3).stream_id());
  EXPECT_NE(a.stream_id(), StreamKey(6).child("x", 3).stream_id());
  EXPECT_NE(StreamKey(5).child("a").child("b").stream_id(), StreamKey(5).child("b").child("a").stream_id());
  EXPECT_EQ(a.to_string(), "5/x:3");
}

TEST(GaussianMatrix, SameKeySameMatrix) {
  const StreamKey k = StreamKey(1).child("g");
  EXPECT_EQ(gaussian_matrix(7, 5, k), gaussian_matrix(7, 5, k));
  EXPECT_NE(gaussian_matrix(7, 5, k), gaussian_matrix(7, 5, k.child("other")));
}

TEST(GaussianMatrix, MeanAndVariance) {
  const Eigen::MatrixXd g = gaussian_matrix(1000, 1000, StreamKey(2).child("moments"));
  const double n = static_cast<double>(g.size());
  const double mean = g.mean();
  const double var = (g.array() - mean).square().sum() / (n - 1.0);
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  // Var of the sample variance of normals is 2/n.
  EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
}

TEST(GaussianMatrix, SiblingStreamsUncorrelated) {
  const StreamKey base(3);
  const Eigen::MatrixXd a = gaussian_matrix(1000, 1000, base.child("s", 0));
  const Eigen::MatrixXd b = gaussian_matrix(1000, 1000, base.child("s", 1));
  const double n = static_cast<double>(a.size());
  const Eigen::ArrayXd x = a.reshaped().array() - a.mean();
  const Eigen::ArrayXd y = b.reshaped().array() - b.mean();
  const double corr = (x * y).sum() / std::sqrt(x.square().sum() * y.square().sum());
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(n));
}

TEST(Stream, UniformInUnitInterval) {
  Stream s(StreamKey(4));
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_LT(std::abs(sum / n - 0.5), 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomPermutation, Trivial) {
  EXPECT_EQ(random_permutation(1, StreamKey(9)), std::vector<std::size_t>{0});
  const StreamKey k = StreamKey(9).child("perm");
  EXPECT_EQ(random_permutation(50, k), random_permutation(50, k));
}

TEST(RandomPermutation, UniformOverSixOrders) {
  std::map<std::vector<std::size_t>, long> counts;
  const long draws = 60000;
  const StreamKey base(10);
  for (long i = 0; i < draws; ++i) ++counts[random_permutation(3, base.child("d", static_cast<std::uint64_t>(i)))];
  ASSERT_EQ(counts.size(), 6u);
  const double p = 1.0 / 6.0;
  const double tol = 4.0 * std::sqrt(p * (1.0 - p) / draws);
  for (const auto& [perm, c] : counts) EXPECT_NEAR(static_cast<double>(c) / draws, p, tol);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, RethrowsTaskFailure) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
