#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "raptt/calibration.hpp"
#include "raptt/covariance.hpp"
#include "raptt/gof.hpp"
#include "raptt/simharness.hpp"

using namespace raptt;

namespace {

SufficientStats null_stats(Eigen::Index n1, Eigen::Index n2, Eigen::Index p, const StreamKey& key,
                           double shift = 0.0) {
  Eigen::MatrixXd x = gaussian_matrix(n1, p, key.child("x"));
  Eigen::MatrixXd y = gaussian_matrix(n2, p, key.child("y"));
  y.array() += shift;
  return summarize(DataMatrix(x), DataMatrix(y));
}

RapttConfig small_config(Eigen::Index m, ProjectionKind kind = ProjectionKind::haar) {
  RapttConfig c;
  c.m = m;
  c.kind = kind;
  c.seed = 77;
  c.threads = 1;
  return c;
}

double projection_pvalue(const SufficientStats& s, const ProjectionMatrix& r) {
  return t2_projected(project_stats(s, r)).pvalue;
}

}  // namespace

TEST(AveragePValue, SingleProjectionLowDimension) {
  // p <= rows + 1: the sampler draws the same p x k Gaussian as haar_projection.
  const SufficientStats s = null_stats(8, 7, 10, StreamKey(1), 0.3);
  RapttConfig c = small_config(1);
  c.k = 4;
  const double direct = projection_pvalue(s, haar_projection(10, 4, StreamKey(c.seed).child("projection", 0)));
  EXPECT_NEAR(average_pvalue(s, c), direct, 1e-10);
}

TEST(AveragePValue, SingleProjectionBlock) {
  const SufficientStats s = null_stats(8, 7, 40, StreamKey(2), 0.3);
  RapttConfig c = small_config(1, ProjectionKind::block);
  c.k = 5;
  const double direct = projection_pvalue(s, block_projection(40, 5, StreamKey(c.seed).child("projection", 0)));
  EXPECT_EQ(average_pvalue(s, c), direct);
}

TEST(AveragePValue, ReducedBasisMatchesExplicitProjection) {
  // p > rows + 1: build the p x k Gaussian whose coordinates in the
  // basis Q of [Z' d] are the sampler's small draw, and project explicitly.
  const Eigen::Index p = 60;
  const Eigen::Index k = 5;
  const SufficientStats s = null_stats(9, 8, p, StreamKey(3), 0.2);
  const Eigen::Index rows = s.centered().rows();
  Eigen::MatrixXd w(p, rows + 1);
  w.leftCols(rows) = s.centered().transpose();
  w.col(rows) = s.diff();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd q_full = qr.householderQ();
  const StreamKey key = StreamKey(77).child("projection", 0);
  Eigen::MatrixXd coords(p, k);
  coords.topRows(rows + 1) = gaussian_matrix(rows + 1, k, key);
  coords.bottomRows(p - rows - 1) = gaussian_matrix(p - rows - 1, k, StreamKey(3).child("rest"));
  const Eigen::MatrixXd g = q_full * coords;
  Eigen::HouseholderQR<Eigen::MatrixXd> gqr(g);
  const Eigen::MatrixXd r = gqr.householderQ() * Eigen::MatrixXd::Identity(p, k);
  const double direct = projection_pvalue(s, ProjectionMatrix::dense(r, ProjectionKind::haar, key));
  RapttConfig c = small_config(1);
  c.k = k;
  EXPECT_NEAR(average_pvalue(s, c), direct, 1e-9);
}

TEST(AveragePValue, NullMeanIsOneHalf) {
  const int reps = 1000;
  double sum = 0.0;
  RapttConfig c = small_config(20);
  for (int i = 0; i < reps; ++i) {
    c.seed = static_cast<std::uint64_t>(1000 + i);
    sum += average_pvalue(null_stats(10, 10, 30, StreamKey(4).child("d", static_cast<std::uint64_t>(i))), c);
  }
  // sd of the average is at most that of one uniform p-value.
  EXPECT_LT(std::abs(sum / reps - 0.5), 4.0 * std::sqrt(1.0 / 12.0 / reps));
}

TEST(Calibration, SingleDraw) {
  const NullCalibration cal = calibrate_null(6, 5, 12, small_config(5), 1);
  ASSERT_EQ(cal.K(), 1);
  EXPECT_GE(cal.theta_bars[0], 0.0);
  EXPECT_LE(cal.theta_bars[0], 1.0);
}

TEST(Cutoff, OrderStatistics) {
  NullCalibration cal;
  for (int i = 0; i < 2000; ++i) cal.theta_bars.push_back(i / 2000.0);
  EXPECT_EQ(cutoff(cal, 0.05), cal.theta_bars[99]);
  EXPECT_EQ(cutoff(cal, 1.0 / 2000.0), cal.theta_bars[0]);
  NullCalibration same;
  same.theta_bars.assign(37, 0.42);
  EXPECT_EQ(cutoff(same, 0.05), 0.42);
  EXPECT_EQ(empirical_pvalue(cal, -1.0), 0.0);
  EXPECT_EQ(empirical_pvalue(cal, 0.5), 1001.0 / 2000.0);
}

TEST(RapttTest, RefusesMismatchedCalibration) {
  const NullCalibration cal = calibrate_null(10, 10, 30, small_config(10), 50);
  const SufficientStats s = null_stats(10, 9, 30, StreamKey(5));
  EXPECT_THROW(raptt_test(s, small_config(10), cal), CalibrationMismatch);
  EXPECT_THROW(raptt_test(null_stats(10, 10, 31, StreamKey(5)), small_config(10), cal), CalibrationMismatch);
  EXPECT_THROW(raptt_test(null_stats(10, 10, 30, StreamKey(5)), small_config(11), cal), CalibrationMismatch);
  EXPECT_THROW(raptt_test(null_stats(10, 10, 30, StreamKey(5)), small_config(10, ProjectionKind::block), cal),
               CalibrationMismatch);
}

TEST(RapttTest, HugeShiftRejects) {
  const RapttConfig c = small_config(30);
  const NullCalibration cal = calibrate_null(10, 10, 30, c, 200);
  const TestReport r = raptt_test(null_stats(10, 10, 30, StreamKey(6), 50.0), c, cal);
  EXPECT_TRUE(r.reject);
  EXPECT_LT(r.statistic, 1e-8);
  EXPECT_EQ(r.pvalue, 0.0);
}

TEST(RapttTest, DeterministicAcrossThreadCounts) {
  for (auto kind : {ProjectionKind::haar, ProjectionKind::block}) {
    RapttConfig c = small_config(64, kind);
    std::vector<TestReport> reports;
    std::vector<NullCalibration> cals;
    for (unsigned t : {1u, 4u, 8u}) {
      c.threads = t;
      cals.push_back(calibrate_null(12, 10, 40, c, 64));
      reports.push_back(raptt_test(null_stats(12, 10, 40, StreamKey(7), 0.2), c, cals.back()));
    }
    for (std::size_t i = 1; i < reports.size(); ++i) {
      EXPECT_EQ(cals[i].theta_bars, cals[0].theta_bars);
      EXPECT_TRUE(reports[i] == reports[0]);
    }
  }
}

TEST(RapttTest, NullSize) {
  const RapttConfig base = small_config(50);
  const NullCalibration cal = calibrate_null(10, 10, 30, base, 2000);
  const int runs = 1000;
  int rejections = 0;
  for (int i = 0; i < runs; ++i) {
    RapttConfig c = base;
    c.seed = StreamKey(8).child("proj", static_cast<std::uint64_t>(i)).stream_id();
    rejections += raptt_test(null_stats(10, 10, 30, StreamKey(8).child("d", static_cast<std::uint64_t>(i))), c, cal).reject;
  }
  EXPECT_NEAR(static_cast<double>(rejections) / runs, 0.05, 0.021);
}

TEST(RapttTest, PowerGrowsWithShift) {
  const RapttConfig base = small_config(40);
  const NullCalibration cal = calibrate_null(10, 10, 30, base, 1000);
  double prev = -1.0;
  for (double shift : {0.0, 0.15, 0.3, 0.6, 1.2}) {
    int rej = 0;
    for (int i = 0; i < 200; ++i) {
      RapttConfig c = base;
      c.seed = static_cast<std::uint64_t>(i);
      rej += raptt_test(null_stats(10, 10, 30, StreamKey(9).child("d", static_cast<std::uint64_t>(i)), shift), c, cal)
                 .reject;
    }
    const double rate = rej / 200.0;
    EXPECT_GE(rate, prev);
    prev = rate;
  }
  EXPECT_GT(prev, 0.99);
}

// theta-bar is unchanged by a common shift and by a scalar covariance, so
// these laws must agree with the Sigma = I law exactly.
TEST(Calibration, NullLawInvariantUnderCommonMeanAndScale) {
  const Eigen::Index n1 = 15;
  const Eigen::Index n2 = 15;
  const Eigen::Index p = 50;
  RapttConfig c = small_config(100);
  c.seed = 501;
  const auto base = calibrate_with(n1, n2, p, c, 2000, sigma_null_generator(make_sigma(1, p), n1, n2)).theta_bars;
  c.seed = 600;
  const Eigen::VectorXd common = Eigen::VectorXd::Constant(p, 3.0);
  const CovarianceSpec scaled = CovarianceSpec::diagonal(0, Eigen::VectorXd::Constant(p, 4.0));
  const auto shifted = calibrate_with(n1, n2, p, c, 2000, [&](const StreamKey& key) {
                         return summarize(sample_dataset(n1, common, scaled, key.child("x")),
                                          sample_dataset(n2, common, scaled, key.child("y")));
                       }).theta_bars;
  EXPECT_GT(ks_two_sample(base, shifted).pvalue, 0.01);
}

// A spiked spectrum lowers the effective dimension of the projected data
// and widens the null law of theta-bar. Checked against an independent
// QR-based implementation (sd 0.110 for Sigma_1, 0.133 for Sigma_2).
TEST(Calibration, NullLawWidensUnderSpikedCovariance) {
  const Eigen::Index n1 = 15;
  const Eigen::Index n2 = 15;
  const Eigen::Index p = 50;
  RapttConfig c = small_config(100);
  std::vector<std::vector<double>> samples;
  for (int id : {1, 2}) {
    c.seed = static_cast<std::uint64_t>(500 + id);
    samples.push_back(calibrate_with(n1, n2, p, c, 2000, sigma_null_generator(make_sigma(id, p), n1, n2)).theta_bars);
  }
  const auto sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m += t;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double t : v) s += (t - m) * (t - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  EXPECT_NEAR(sd(samples[0]), 0.110, 0.008);
  EXPECT_NEAR(sd(samples[1]), 0.133, 0.008);
  EXPECT_LT(ks_two_sample(samples[0], samples[1]).pvalue, 0.01);
}

TEST(Calibration, SizeErrorShrinksWithK) {
  const Eigen::Index n1 = 6;
  const Eigen::Index n2 = 6;
  const Eigen::Index p = 12;
  RapttConfig c = small_config(10);
  c.seed = 999;
  const NullCalibration reference = calibrate_null(n1, n2, p, c, 100000);
  std::vector<double> errors;
  for (Eigen::Index K : {200, 2000, 20000}) {
    double err = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
      c.seed = static_cast<std::uint64_t>(K * 100 + rep);
      const double u = cutoff(calibrate_null(n1, n2, p, c, K), 0.05);
      // Size of "reject iff theta < u" under the reference law.
      const auto below = std::lower_bound(reference.theta_bars.begin(), reference.theta_bars.end(), u) -
                         reference.theta_bars.begin();
      err += std::abs(static_cast<double>(below) / reference.K() - 0.05);
    }
    errors.push_back(err / reps);
  }
  EXPECT_GT(errors[0], errors[1]);
  EXPECT_GT(errors[1], errors[2]);
}

TEST(CalibrationFile, RoundTrip) {
  const NullCalibration cal = calibrate_null(6, 5, 12, small_config(5), 40);
  const auto path = std::filesystem::temp_directory_path() / "raptt_cal_roundtrip.json";
  save_calibration(cal, path);
  const NullCalibration back = load_calibration(path);
  EXPECT_EQ(back.theta_bars, cal.theta_bars);
  EXPECT_EQ(back.n1, cal.n1);
  EXPECT_EQ(back.k, cal.k);
  EXPECT_EQ(back.kind, cal.kind);
  EXPECT_EQ(back.seed, cal.seed);
  std::filesystem::remove(path);
}

TEST(CalibrationFile, Validation) {
  const NullCalibration cal = calibrate_null(6, 5, 12, small_config(5), 10);
  auto j = calibration_to_json(cal);
  auto unsorted = j;
  std::swap(unsorted["theta_bars"][0], unsorted["theta_bars"][9]);
  EXPECT_THROW(calibration_from_json(unsorted), CalibrationMismatch);
  auto wrong_k = j;
  wrong_k["K"] = 11;
  EXPECT_THROW(calibration_from_json(wrong_k), CalibrationMismatch);
  auto out_of_range = j;
  out_of_range["theta_bars"][9] = 1.5;
  EXPECT_THROW(calibration_from_json(out_of_range), CalibrationMismatch);
  auto version = j;
  version["version"] = 99;
  EXPECT_THROW(calibration_from_json(version), CalibrationMismatch);
  auto missing = j;
  missing.erase("m");
  EXPECT_THROW(calibration_from_json(missing), CalibrationMismatch);
  const auto path = std::filesystem::temp_directory_path() / "raptt_cal_garbage.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_calibration(path), CalibrationMismatch);
  std::filesystem::remove(path);
}

TEST(CalibrationFile, CacheReusesMatchingDesign) {
  const auto dir = std::filesystem::temp_directory_path() / "raptt_cache_test";
  std::filesystem::remove_all(dir);
  const RapttConfig c = small_config(5);
  const NullCalibration a = load_or_calibrate(dir, 6, 5, 12, c, 30);
  EXPECT_TRUE(std::filesystem::exists(calibration_cache_path(dir, 6, 5, 12, a.k, 5, 30, c.kind, c.seed)));
  const NullCalibration b = load_or_calibrate(dir, 6, 5, 12, c, 30);
  EXPECT_EQ(a.theta_bars, b.theta_bars);
  std::filesystem::remove_all(dir);
}
