#pragma once

// The averaged-p-value test: average m single-projection p-values and
// compare against the alpha-quantile of a Monte Carlo null sample of that
// average.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "raptt/error.hpp"
#include "raptt/hotelling.hpp"
#include "raptt/linstat.hpp"
#include "raptt/parallel.hpp"
#include "raptt/projections.hpp"
#include "raptt/randsrc.hpp"

namespace raptt {

struct RapttConfig {
  Eigen::Index m = 500;
  Eigen::Index k = 0;  // 0 selects choose_k(n1, n2, alpha)
  ProjectionKind kind = ProjectionKind::haar;
  double alpha = 0.05;
  std::uint64_t seed = 20130202;
  unsigned threads = 0;
};

inline Eigen::Index resolve_k(const RapttConfig& config, Eigen::Index n1, Eigen::Index n2) {
  const Eigen::Index n = n1 + n2 - 2;
  const Eigen::Index k = config.k > 0 ? config.k : choose_k(n1, n2, config.alpha);
  if (k < 1 || k >= n)
    throw DomainError("projected dimension k=" + std::to_string(k) + " must satisfy 1 <= k < n=" +
                      std::to_string(n));
  return k;
}

namespace detail {

// Draws single-projection p-values for one dataset.
//
// Haar: the statistic depends on R only through its column span, so the
// raw Gaussian matrix G can stand in for its Q factor. When p exceeds the
// number of rows plus one, everything lives in the span of [Z', d]; with
// W' = [Z' d] = Q T, the products Z G and d'G equal T'(Q'G) where Q'G is
// again iid Gaussian, so p-dimensional draws shrink to (rows+1)-dimensional
// ones with the same joint law.
class PValueSampler {
 public:
  PValueSampler(const SufficientStats& stats, Eigen::Index k, ProjectionKind kind)
      : stats_(stats), k_(k), kind_(kind) {
    if (k < 1 || k >= stats.n())
      throw DomainError("projected dimension k=" + std::to_string(k) + " must satisfy 1 <= k < n=" +
                        std::to_string(stats.n()));
    if (kind_ == ProjectionKind::haar) {
      const Eigen::Index rows = stats.centered().rows();
      if (stats.p() > rows + 1) {
        Eigen::MatrixXd w(stats.p(), rows + 1);
        w.leftCols(rows) = stats.centered().transpose();
        w.col(rows) = stats.diff();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
        const Eigen::MatrixXd t =
            qr.matrixQR().topRows(rows + 1).triangularView<Eigen::Upper>();
        reduced_rows_ = t.leftCols(rows).transpose();
        reduced_diff_ = t.col(rows);
      } else {
        reduced_rows_ = stats.centered();
        reduced_diff_ = stats.diff();
      }
    }
  }

  [[nodiscard]] double pvalue(const StreamKey& key) const {
    if (kind_ == ProjectionKind::haar) {
      const Eigen::MatrixXd g = gaussian_matrix(reduced_diff_.size(), k_, key);
      return t2_projected(projected_from_parts(g.transpose() * reduced_diff_, reduced_rows_ * g,
                                               stats_.n1(), stats_.n2()))
          .pvalue;
    }
    return t2_projected(project_stats(stats_, block_projection(stats_.p(), k_, key))).pvalue;
  }

 private:
  const SufficientStats& stats_;
  Eigen::Index k_;
  ProjectionKind kind_;
  Eigen::MatrixXd reduced_rows_;
  Eigen::VectorXd reduced_diff_;
};

inline StreamKey projection_key(const StreamKey& base, Eigen::Index i) {
  return base.child("projection", static_cast<std::uint64_t>(i));
}

}  // namespace detail

// The m single-projection p-values theta_1..theta_m for one dataset, in
// projection-index order. Projection i uses StreamKey(seed)/projection:i.
inline std::vector<double> projection_pvalues(const SufficientStats& stats, const RapttConfig& config) {
  detail::require(config.m >= 1, "number of projections m must be >= 1");
  const Eigen::Index k = resolve_k(config, stats.n1(), stats.n2());
  const detail::PValueSampler sampler(stats, k, config.kind);
  const StreamKey base(config.seed);
  std::vector<double> out(static_cast<std::size_t>(config.m));
  parallel_for(out.size(), config.threads, [&](std::size_t i) {
    out[i] = sampler.pvalue(detail::projection_key(base, static_cast<Eigen::Index>(i)));
  });
  return out;
}

inline double mean_in_order(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Averaged p-value over m independent projections.
inline double average_pvalue(const SufficientStats& stats, const RapttConfig& config) {
  return mean_in_order(projection_pvalues(stats, config));
}

struct NullCalibration {
  std::vector<double> theta_bars;  // ascending
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  Eigen::Index p = 0;
  Eigen::Index k = 0;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  ProjectionKind kind = ProjectionKind::haar;

  [[nodiscard]] Eigen::Index K() const { return static_cast<Eigen::Index>(theta_bars.size()); }
};

// Simulates one null dataset's sufficient statistics from a replicate key.
using NullGenerator = std::function<SufficientStats(const StreamKey&)>;

// Sufficient statistics under mu = 0, Sigma = I: Xbar - Ybar ~ N(0, (1/n1 + 1/n2) I)
// and n iid N(0, I) rows whose cross-product over n is S.
inline NullGenerator identity_null_generator(Eigen::Index n1, Eigen::Index n2, Eigen::Index p) {
  return [=](const StreamKey& key) {
    const double sd = std::sqrt(1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
    Eigen::VectorXd d = gaussian_matrix(p, 1, key.child("mean")).col(0) * sd;
    Eigen::MatrixXd z = gaussian_matrix(n1 + n2 - 2, p, key.child("scatter"));
    return SufficientStats(std::move(d), Eigen::VectorXd::Zero(p), std::move(z), n1, n2);
  };
}

// K null draws of the averaged p-value from an arbitrary null generator.
// Replicate r uses StreamKey(seed)/null:r; its projections hang below it.
inline NullCalibration calibrate_with(Eigen::Index n1, Eigen::Index n2, Eigen::Index p,
                                      const RapttConfig& config, Eigen::Index K,
                                      const NullGenerator& generate) {
  detail::require(K >= 1, "calibration size K must be >= 1");
  detail::require(config.m >= 1, "number of projections m must be >= 1");
  NullCalibration cal;
  cal.n1 = n1;
  cal.n2 = n2;
  cal.p = p;
  cal.k = resolve_k(config, n1, n2);
  cal.m = config.m;
  cal.seed = config.seed;
  cal.kind = config.kind;
  cal.theta_bars.assign(static_cast<std::size_t>(K), 0.0);

  const StreamKey root(config.seed);
  parallel_for(cal.theta_bars.size(), config.threads, [&](std::size_t r) {
    const StreamKey rep = root.child("null", r);
    const SufficientStats stats = generate(rep.child("data"));
    if (stats.p() != p || stats.n1() != n1 || stats.n2() != n2)
      throw DimensionMismatch("null generator produced statistics of the wrong shape");
    const detail::PValueSampler sampler(stats, cal.k, cal.kind);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cal.m; ++i) sum += sampler.pvalue(detail::projection_key(rep, i));
    cal.theta_bars[r] = sum / static_cast<double>(cal.m);
  });
  std::sort(cal.theta_bars.begin(), cal.theta_bars.end());
  return cal;
}

// Null law of the averaged p-value under mu = 0, Sigma = I at dimension p.
inline NullCalibration calibrate_null(Eigen::Index n1, Eigen::Index n2, Eigen::Index p,
                                      const RapttConfig& config, Eigen::Index K) {
  return calibrate_with(n1, n2, p, config, K, identity_null_generator(n1, n2, p));
}

// ceil(alpha K)-th smallest null draw.
inline double cutoff(const NullCalibration& cal, double alpha) {
  detail::require(alpha > 0.0 && alpha < 1.0, "cutoff: alpha must lie in (0,1)");
  if (cal.theta_bars.empty()) throw DomainError("cutoff: empty calibration");
  const double pos = alpha * static_cast<double>(cal.K());
  auto rank = static_cast<Eigen::Index>(std::ceil(pos - 1e-9 * std::max(1.0, pos)));
  rank = std::clamp<Eigen::Index>(rank, 1, cal.K());
  return cal.theta_bars[static_cast<std::size_t>(rank - 1)];
}

// Fraction of null draws at or below theta_bar.
inline double empirical_pvalue(const NullCalibration& cal, double theta_bar) {
  if (cal.theta_bars.empty()) throw DomainError("empirical_pvalue: empty calibration");
  const auto it = std::upper_bound(cal.theta_bars.begin(), cal.theta_bars.end(), theta_bar);
  return static_cast<double>(it - cal.theta_bars.begin()) / static_cast<double>(cal.K());
}

struct TestReport {
  std::string method;
  double statistic = 0.0;
  double threshold = 0.0;  // u_alpha for the averaged test, z_alpha for normal-reference tests
  double pvalue = 1.0;
  bool reject = false;
  double alpha = 0.05;
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  Eigen::Index p = 0;
  Eigen::Index k = 0;
  Eigen::Index m = 0;
  Eigen::Index K = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j{{"method", method}, {"statistic", statistic}, {"threshold", threshold},
                     {"pvalue", pvalue}, {"reject", reject},       {"alpha", alpha},
                     {"n1", n1},         {"n2", n2},               {"p", p}};
    if (k > 0) {
      j["k"] = k;
      j["m"] = m;
      j["K"] = K;
      j["seed"] = seed;
    }
    return j;
  }

  bool operator==(const TestReport&) const = default;
};

inline void check_calibration_matches(const NullCalibration& cal, Eigen::Index n1, Eigen::Index n2,
                                      Eigen::Index p, Eigen::Index k, const RapttConfig& config) {
  std::ostringstream why;
  if (cal.n1 != n1 || cal.n2 != n2) why << " n1/n2 " << cal.n1 << "/" << cal.n2 << " vs " << n1 << "/" << n2 << ";";
  if (cal.p != p) why << " p " << cal.p << " vs " << p << ";";
  if (cal.k != k) why << " k " << cal.k << " vs " << k << ";";
  if (cal.m != config.m) why << " m " << cal.m << " vs " << config.m << ";";
  if (cal.kind != config.kind)
    why << " projection " << to_string(cal.kind) << " vs " << to_string(config.kind) << ";";
  if (!why.str().empty())
    throw CalibrationMismatch("calibration does not match the test design:" + why.str());
  if (cal.theta_bars.empty()) throw CalibrationMismatch("calibration is empty");
}

// Rejects when the averaged p-value falls strictly below u_alpha.
inline TestReport raptt_test(const SufficientStats& stats, const RapttConfig& config,
                             const NullCalibration& cal) {
  const Eigen::Index k = resolve_k(config, stats.n1(), stats.n2());
  check_calibration_matches(cal, stats.n1(), stats.n2(), stats.p(), k, config);
  TestReport out;
  out.method = std::string("RAPTT-") + std::string(to_string(config.kind));
  out.statistic = average_pvalue(stats, config);
  out.threshold = cutoff(cal, config.alpha);
  out.pvalue = empirical_pvalue(cal, out.statistic);
  out.reject = out.statistic < out.threshold;
  out.alpha = config.alpha;
  out.n1 = stats.n1();
  out.n2 = stats.n2();
  out.p = stats.p();
  out.k = k;
  out.m = config.m;
  out.K = cal.K();
  out.seed = config.seed;
  return out;
}

inline TestReport raptt_test(const DataMatrix& x, const DataMatrix& y, const RapttConfig& config,
                             const NullCalibration& cal) {
  return raptt_test(summarize(x, y), config, cal);
}

// ---------------------------------------------------------------------------
// Calibration files: {version, n1, n2, p, k, m, K, kind, seed, theta_bars}.

inline constexpr int kCalibrationVersion = 1;

inline nlohmann::json calibration_to_json(const NullCalibration& cal) {
  return nlohmann::json{{"version", kCalibrationVersion},
                        {"n1", cal.n1},
                        {"n2", cal.n2},
                        {"p", cal.p},
                        {"k", cal.k},
                        {"m", cal.m},
                        {"K", cal.K()},
                        {"kind", std::string(to_string(cal.kind))},
                        {"seed", cal.seed},
                        {"theta_bars", cal.theta_bars}};
}

inline NullCalibration calibration_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kCalibrationVersion)
      throw CalibrationMismatch("unsupported calibration version " + j.at("version").dump());
    NullCalibration cal;
    cal.n1 = j.at("n1").get<Eigen::Index>();
    cal.n2 = j.at("n2").get<Eigen::Index>();
    cal.p = j.at("p").get<Eigen::Index>();
    cal.k = j.at("k").get<Eigen::Index>();
    cal.m = j.at("m").get<Eigen::Index>();
    cal.seed = j.at("seed").get<std::uint64_t>();
    cal.kind = parse_projection_kind(j.at("kind").get<std::string>());
    cal.theta_bars = j.at("theta_bars").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(cal.theta_bars.size()) != j.at("K").get<Eigen::Index>())
      throw CalibrationMismatch("calibration K does not match the number of draws");
    if (cal.theta_bars.empty()) throw CalibrationMismatch("calibration has no draws");
    if (!std::is_sorted(cal.theta_bars.begin(), cal.theta_bars.end()))
      throw CalibrationMismatch("calibration draws are not sorted");
    if (cal.theta_bars.front() < 0.0 || cal.theta_bars.back() > 1.0)
      throw CalibrationMismatch("calibration draws must lie in [0,1]");
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw CalibrationMismatch(std::string("malformed calibration document: ") + e.what());
  }
}

inline void save_calibration(const NullCalibration& cal, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write calibration file " + path.string());
  out << calibration_to_json(cal).dump() << '\n';
}

inline NullCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read calibration file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CalibrationMismatch("calibration file " + path.string() + " is not valid JSON: " + e.what());
  }
  return calibration_from_json(j);
}

// File name under a cache directory for a calibration design.
inline std::filesystem::path calibration_cache_path(const std::filesystem::path& dir, Eigen::Index n1,
                                                    Eigen::Index n2, Eigen::Index p, Eigen::Index k,
                                                    Eigen::Index m, Eigen::Index K, ProjectionKind kind,
                                                    std::uint64_t seed) {
  std::ostringstream name;
  name << "null_" << to_string(kind) << "_n1-" << n1 << "_n2-" << n2 << "_p-" << p << "_k-" << k
       << "_m-" << m << "_K-" << K << "_seed-" << seed << ".json";
  return dir / name.str();
}

// Loads a cached calibration with exactly this design or builds and stores it.
inline NullCalibration load_or_calibrate(const std::filesystem::path& dir, Eigen::Index n1,
                                         Eigen::Index n2, Eigen::Index p, const RapttConfig& config,
                                         Eigen::Index K) {
  const Eigen::Index k = resolve_k(config, n1, n2);
  const auto path = calibration_cache_path(dir, n1, n2, p, k, config.m, K, config.kind, config.seed);
  if (std::filesystem::exists(path)) {
    NullCalibration cal = load_calibration(path);
    check_calibration_matches(cal, n1, n2, p, k, config);
    if (cal.K() != K || cal.seed != config.seed)
      throw CalibrationMismatch("cached calibration " + path.string() + " has a different K or seed");
    return cal;
  }
  NullCalibration cal = calibrate_null(n1, n2, p, config, K);
  std::filesystem::create_directories(dir);
  save_calibration(cal, path);
  return cal;
}

}  // namespace raptt
