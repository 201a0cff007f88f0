#pragma once

// Simulation design: covariances, sparse alternatives, power tables over
// (alternative, sparsity) cells and the projected-dimension ratio study.
//
// Every random quantity hangs off StreamKey(seed) so a table is identical
// for any worker count:
//   seed/cell:c/run:r/{x,y,alternative,projections}   per-run data
//   seed/cell:c/alternative                           fixed-alternative mode
//   seed/calibration:<kind>                           RAPTT null calibration

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "raptt/calibration.hpp"
#include "raptt/competitors.hpp"
#include "raptt/covariance.hpp"
#include "raptt/error.hpp"
#include "raptt/hotelling.hpp"
#include "raptt/linstat.hpp"
#include "raptt/parallel.hpp"
#include "raptt/randsrc.hpp"

namespace raptt {

enum class Method { raptt_haar, raptt_block, cq, sd, bs };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::raptt_haar:
      return "RAPTT-haar";
    case Method::raptt_block:
      return "RAPTT-block";
    case Method::cq:
      return "CQ";
    case Method::sd:
      return "SD";
    case Method::bs:
      return "BS";
  }
  return "?";
}

inline std::vector<Method> all_methods() {
  return {Method::raptt_haar, Method::raptt_block, Method::cq, Method::sd, Method::bs};
}

inline Method parse_method(const std::string& s) {
  for (Method m : all_methods()) {
    std::string a = method_name(m);
    std::string b = s;
    std::transform(a.begin(), a.end(), a.begin(), ::tolower);
    std::transform(b.begin(), b.end(), b.begin(), ::tolower);
    if (a == b) return m;
  }
  throw DomainError("unknown method '" + s + "' (expected RAPTT-haar, RAPTT-block, CQ, SD or BS)");
}

// ---------------------------------------------------------------------------
// Alternatives

struct AlternativeSpec {
  int id = 1;
  double sparsity = 0.0;
  Eigen::VectorXd mu2;
  StreamKey key{0};
};

// ceil(sparsity * p), robust to representation error (0.01 * 200 is 2).
inline Eigen::Index nonzero_count(double sparsity, Eigen::Index p) {
  const double x = sparsity * static_cast<double>(p);
  return static_cast<Eigen::Index>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

// Alt 1: (1/2) mu' Sigma^{-1} mu. Alt 2: ||mu||^2 / sqrt(tr Sigma^2).
inline double alternative_constraint(int id, const Eigen::VectorXd& mu, const CovarianceSpec& sigma) {
  if (id == 1) return 0.5 * mu.dot(sigma.solve(mu));
  if (id == 2) return mu.squaredNorm() / std::sqrt(sigma.trace_sq());
  throw DomainError("alternative id must be 1 or 2, got " + std::to_string(id));
}

inline double alternative_target(int id) { return id == 1 ? 1.0 : 0.1; }

inline AlternativeSpec make_alternative(int id, double sparsity, const CovarianceSpec& sigma,
                                        const StreamKey& key) {
  detail::require(id == 1 || id == 2, "alternative id must be 1 or 2");
  const Eigen::Index p = sigma.p();
  const Eigen::Index count = nonzero_count(sparsity, p);
  const double expected = sparsity * static_cast<double>(p);
  if (expected < 1.0 - 1e-9 || count > p)
    throw DomainError("sparsity " + std::to_string(sparsity) + " gives " + std::to_string(count) +
                      " nonzero coordinates out of p=" + std::to_string(p));
  AlternativeSpec out;
  out.id = id;
  out.sparsity = sparsity;
  out.key = key;
  for (std::uint64_t attempt = 0;; ++attempt) {
    Stream stream(attempt == 0 ? key : key.child("redraw", attempt));
    const auto perm = random_permutation(static_cast<std::size_t>(p), stream);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < count; ++i)
      v(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])) = 1.0 + stream.gaussian();
    const double c = alternative_constraint(id, v, sigma);
    if (!(c > 0.0)) continue;
    out.mu2 = v * std::sqrt(alternative_target(id) / c);
    break;
  }
  return out;
}

// n rows distributed as N_p(mu, Sigma).
inline DataMatrix sample_dataset(Eigen::Index n, const Eigen::VectorXd& mu, const CovarianceSpec& sigma,
                                 const StreamKey& key) {
  detail::require(n >= 2, "sample_dataset: n must be >= 2");
  if (mu.size() != sigma.p()) throw DimensionMismatch("sample_dataset: mean has wrong length");
  Eigen::MatrixXd x = sigma.correlate(gaussian_matrix(n, sigma.p(), key));
  x.rowwise() += mu.transpose();
  return DataMatrix(std::move(x));
}

// Null sufficient statistics with both groups drawn from N(0, Sigma).
inline NullGenerator sigma_null_generator(const CovarianceSpec& sigma, Eigen::Index n1, Eigen::Index n2) {
  return [sigma, n1, n2](const StreamKey& key) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sigma.p());
    return summarize(sample_dataset(n1, zero, sigma, key.child("x")),
                     sample_dataset(n2, zero, sigma, key.child("y")));
  };
}

// Null draws pooled across Sigma_1..Sigma_4, K split as evenly as possible.
inline NullCalibration pooled_calibration(Eigen::Index n1, Eigen::Index n2, Eigen::Index p,
                                          const RapttConfig& config, Eigen::Index K) {
  detail::require(K >= 4, "pooled calibration needs K >= 4");
  NullCalibration out;
  for (int id = 1; id <= 4; ++id) {
    RapttConfig c = config;
    c.seed = StreamKey(config.seed).child("sigma", static_cast<std::uint64_t>(id)).stream_id();
    const Eigen::Index share = K / 4 + (id - 1 < K % 4 ? 1 : 0);
    NullCalibration part = calibrate_with(n1, n2, p, c, share, sigma_null_generator(make_sigma(id, p), n1, n2));
    if (id == 1) {
      out = part;
      out.seed = config.seed;
    } else {
      out.theta_bars.insert(out.theta_bars.end(), part.theta_bars.begin(), part.theta_bars.end());
    }
  }
  std::sort(out.theta_bars.begin(), out.theta_bars.end());
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration (key=value text, '#' comments, lists comma separated)

struct ExperimentConfig {
  std::string experiment = "power";  // power | k_ratio
  std::string scale = "desk";        // desk | full
  int sigma_id = 1;
  std::vector<int> sigma_ids;  // k_ratio only; empty means {sigma_id}
  Eigen::Index p = 200;
  Eigen::Index n1 = 50;
  Eigen::Index n2 = 50;
  Eigen::Index runs = 300;
  Eigen::Index m = 500;
  Eigen::Index K = 2000;
  Eigen::Index k = 0;  // 0: choose_k
  double alpha = 0.05;
  std::uint64_t seed = 20130202;
  unsigned threads = 0;
  std::vector<Method> methods = all_methods();
  std::vector<int> alternatives{1, 2};
  std::vector<double> sparsities{0.01, 0.05, 0.25, 0.50, 0.75};
  bool include_null = true;
  bool fixed_alternative = false;
  bool pooled_null = false;
  ProjectionKind projection = ProjectionKind::haar;  // k_ratio only
  std::vector<Eigen::Index> k_grid;                  // k_ratio only
  std::string cache_dir;                             // optional calibration cache
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw DomainError("config: bad value '" + value + "' for " + key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DomainError("config: bad boolean '" + value + "' for " + key);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

}  // namespace detail

inline void apply_scale(ExperimentConfig& c, const std::string& scale) {
  if (scale == "desk") {
    c.runs = 300;
    c.m = 500;
    c.K = 2000;
  } else if (scale == "full") {
    c.runs = 1000;
    c.m = 5000;
    c.K = 10000;
  } else {
    throw DomainError("config: scale must be desk or full, got '" + scale + "'");
  }
  c.scale = scale;
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "experiment") {
    if (value != "power" && value != "k_ratio")
      throw DomainError("config: experiment must be power or k_ratio, got '" + value + "'");
    c.experiment = value;
  } else if (key == "scale") {
    apply_scale(c, value);
  } else if (key == "sigma_id") {
    c.sigma_id = parse_number<int>(key, value);
  } else if (key == "sigma_ids") {
    c.sigma_ids.clear();
    for (const auto& s : detail::split_list(value)) c.sigma_ids.push_back(parse_number<int>(key, s));
  } else if (key == "p") {
    c.p = parse_number<Eigen::Index>(key, value);
  } else if (key == "n1") {
    c.n1 = parse_number<Eigen::Index>(key, value);
  } else if (key == "n2") {
    c.n2 = parse_number<Eigen::Index>(key, value);
  } else if (key == "runs") {
    c.runs = parse_number<Eigen::Index>(key, value);
  } else if (key == "m") {
    c.m = parse_number<Eigen::Index>(key, value);
  } else if (key == "K") {
    c.K = parse_number<Eigen::Index>(key, value);
  } else if (key == "k") {
    c.k = value == "auto" ? 0 : parse_number<Eigen::Index>(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_number<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<unsigned>(key, value);
  } else if (key == "methods") {
    c.methods.clear();
    for (const auto& s : detail::split_list(value)) c.methods.push_back(parse_method(s));
  } else if (key == "alternatives") {
    c.alternatives.clear();
    for (const auto& s : detail::split_list(value)) c.alternatives.push_back(parse_number<int>(key, s));
  } else if (key == "sparsities") {
    c.sparsities.clear();
    for (const auto& s : detail::split_list(value)) c.sparsities.push_back(parse_number<double>(key, s));
  } else if (key == "include_null") {
    c.include_null = detail::parse_bool(key, value);
  } else if (key == "fixed_alternative") {
    c.fixed_alternative = detail::parse_bool(key, value);
  } else if (key == "pooled_null") {
    c.pooled_null = detail::parse_bool(key, value);
  } else if (key == "projection") {
    c.projection = parse_projection_kind(value);
  } else if (key == "k_grid") {
    c.k_grid.clear();
    for (const auto& s : detail::split_list(value)) c.k_grid.push_back(parse_number<Eigen::Index>(key, s));
  } else if (key == "cache_dir") {
    c.cache_dir = value;
  } else {
    throw DomainError("config: unknown key '" + key + "'");
  }
}

// Reads key=value lines. `scale` is applied first so explicit runs/m/K win
// regardless of their position in the file.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
    entries.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  ExperimentConfig c;
  for (const auto& [k, v] : entries)
    if (k == "scale") set_config_value(c, k, v);
  for (const auto& [k, v] : entries)
    if (k != "scale") set_config_value(c, k, v);
  return c;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in);
}

// Resolved configuration as key=value pairs; feeding them back through
// parse_experiment_config reproduces the run.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(method_name(m));
  std::ostringstream alpha;
  alpha << std::setprecision(17) << c.alpha;
  std::ostringstream sparsities;
  sparsities << std::setprecision(17);
  for (std::size_t i = 0; i < c.sparsities.size(); ++i) sparsities << (i ? "," : "") << c.sparsities[i];
  std::vector<std::pair<std::string, std::string>> out{
      {"experiment", c.experiment},
      {"scale", c.scale},
      {"sigma_id", std::to_string(c.sigma_id)},
      {"p", std::to_string(c.p)},
      {"n1", std::to_string(c.n1)},
      {"n2", std::to_string(c.n2)},
      {"runs", std::to_string(c.runs)},
      {"m", std::to_string(c.m)},
      {"K", std::to_string(c.K)},
      {"k", c.k == 0 ? std::string("auto") : std::to_string(c.k)},
      {"alpha", alpha.str()},
      {"seed", std::to_string(c.seed)},
      {"methods", detail::join(methods)},
      {"alternatives", detail::join(c.alternatives)},
      {"sparsities", sparsities.str()},
      {"include_null", c.include_null ? "true" : "false"},
      {"fixed_alternative", c.fixed_alternative ? "true" : "false"},
      {"pooled_null", c.pooled_null ? "true" : "false"},
      {"projection", std::string(to_string(c.projection))},
  };
  if (!c.sigma_ids.empty()) out.emplace_back("sigma_ids", detail::join(c.sigma_ids));
  if (!c.k_grid.empty()) out.emplace_back("k_grid", detail::join(c.k_grid));
  return out;
}

inline std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  for (const auto& [k, v] : config_entries(c)) out << k << "=" << v << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Power tables

struct PowerCell {
  long rejections = 0;
  long runs = 0;

  [[nodiscard]] double rate() const { return runs > 0 ? static_cast<double>(rejections) / runs : 0.0; }
  [[nodiscard]] double se() const { return std::sqrt(rate() * (1.0 - rate()) / static_cast<double>(runs)); }
};

struct PowerRow {
  int alternative = 0;  // 0 for the null row
  double sparsity = 0.0;
  std::vector<PowerCell> cells;  // one per method, in table order

  [[nodiscard]] std::string label() const {
    if (alternative == 0) return "Null";
    std::ostringstream out;
    out << "Alt" << alternative << " " << std::setprecision(6) << 100.0 * sparsity << "%";
    return out.str();
  }
};

struct PowerTable {
  ExperimentConfig config;
  Eigen::Index k = 0;  // resolved projected dimension
  std::vector<Method> methods;
  std::vector<PowerRow> rows;
  std::vector<double> thresholds;  // u_alpha per RAPTT method, NaN for others

  [[nodiscard]] const PowerCell& cell(int alternative, double sparsity, Method method) const {
    const auto mit = std::find(methods.begin(), methods.end(), method);
    if (mit == methods.end()) throw DomainError("method " + method_name(method) + " not in table");
    for (const auto& row : rows)
      if (row.alternative == alternative && (alternative == 0 || std::abs(row.sparsity - sparsity) < 1e-12))
        return row.cells[static_cast<std::size_t>(mit - methods.begin())];
    throw DomainError("no such row in power table");
  }

  [[nodiscard]] std::string metadata_block() const {
    std::ostringstream out;
    for (const auto& [key, v] : config_entries(config)) out << "# " << key << "=" << v << "\n";
    out << "# resolved_k=" << k << "\n";
    return out.str();
  }

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream out;
    out << metadata_block();
    out << "alternative,nonzero";
    for (Method m : methods) out << "," << method_name(m);
    for (Method m : methods) out << "," << method_name(m) << "_se";
    out << "\n";
    out << std::setprecision(10);
    for (const auto& row : rows) {
      out << (row.alternative == 0 ? std::string("Null") : "Alt. " + std::to_string(row.alternative)) << ",";
      if (row.alternative != 0) out << 100.0 * row.sparsity << "%";
      for (const auto& c : row.cells) out << "," << c.rate();
      for (const auto& c : row.cells) out << "," << c.se();
      out << "\n";
    }
    return out.str();
  }

  [[nodiscard]] std::string to_text() const {
    std::ostringstream out;
    out << "Empirical power and size, Sigma_" << config.sigma_id << ", p=" << config.p << ", n1=" << config.n1
        << ", n2=" << config.n2 << ", runs=" << config.runs << ", k=" << k << ", m=" << config.m
        << ", K=" << config.K << ", seed=" << config.seed << "\n";
    out << std::left << std::setw(14) << "";
    for (Method m : methods) out << std::right << std::setw(16) << method_name(m);
    out << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& row : rows) {
      out << std::left << std::setw(14) << row.label();
      for (const auto& c : row.cells) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(3) << c.rate() << " (" << c.se() << ")";
        out << std::right << std::setw(16) << cell.str();
      }
      out << "\n";
    }
    return out.str();
  }
};

namespace detail {

inline void validate_experiment(const ExperimentConfig& c) {
  require(c.runs >= 1, "experiment: runs must be >= 1");
  require(c.alpha > 0.0 && c.alpha < 1.0, "experiment: alpha must lie in (0,1)");
  require(c.n1 >= 2 && c.n2 >= 2, "experiment: each group needs at least 2 observations");
  require(c.p >= 1, "experiment: p must be positive");
}

inline std::uint64_t calibration_seed(std::uint64_t seed, ProjectionKind kind) {
  return StreamKey(seed).child("calibration", kind == ProjectionKind::haar ? 0 : 1).stream_id();
}

}  // namespace detail

// Simulates config.runs datasets per cell and records each method's
// rejection rate. RAPTT cutoffs come from one null calibration per
// projection kind, built once and shared by all cells.
inline PowerTable run_power_experiment(const ExperimentConfig& config) {
  detail::validate_experiment(config);
  detail::require(!config.methods.empty(), "experiment: no methods selected");
  const CovarianceSpec sigma = make_sigma(config.sigma_id, config.p);

  PowerTable table;
  table.config = config;
  table.methods = config.methods;
  table.k = resolve_k(RapttConfig{config.m, config.k, ProjectionKind::haar, config.alpha, config.seed, 1},
                      config.n1, config.n2);

  // Calibrations, indexed like methods.
  std::vector<NullCalibration> cals(table.methods.size());
  std::vector<RapttConfig> raptt_configs(table.methods.size());
  table.thresholds.assign(table.methods.size(), std::nan(""));
  for (std::size_t j = 0; j < table.methods.size(); ++j) {
    const Method m = table.methods[j];
    if (m != Method::raptt_haar && m != Method::raptt_block) continue;
    RapttConfig rc;
    rc.m = config.m;
    rc.k = table.k;
    rc.kind = m == Method::raptt_haar ? ProjectionKind::haar : ProjectionKind::block;
    rc.alpha = config.alpha;
    rc.seed = detail::calibration_seed(config.seed, rc.kind);
    rc.threads = config.threads;
    if (config.pooled_null)
      cals[j] = pooled_calibration(config.n1, config.n2, config.p, rc, config.K);
    else if (!config.cache_dir.empty())
      cals[j] = load_or_calibrate(config.cache_dir, config.n1, config.n2, config.p, rc, config.K);
    else
      cals[j] = calibrate_null(config.n1, config.n2, config.p, rc, config.K);
    rc.threads = 1;
    raptt_configs[j] = rc;
    table.thresholds[j] = cutoff(cals[j], config.alpha);
  }

  std::vector<std::pair<int, double>> cells;
  for (int a : config.alternatives)
    for (double s : config.sparsities) cells.emplace_back(a, s);
  if (config.include_null) cells.emplace_back(0, 0.0);

  const StreamKey root(config.seed);
  const std::size_t nm = table.methods.size();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(config.p);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [alt, sparsity] = cells[c];
    const StreamKey cell_key = root.child("cell", c);
    Eigen::VectorXd fixed_mu;
    if (alt != 0 && config.fixed_alternative)
      fixed_mu = make_alternative(alt, sparsity, sigma, cell_key.child("alternative")).mu2;

    std::vector<unsigned char> rejected(static_cast<std::size_t>(config.runs) * nm, 0);
    parallel_for(static_cast<std::size_t>(config.runs), config.threads, [&](std::size_t r) {
      const StreamKey run = cell_key.child("run", r);
      Eigen::VectorXd mu2 = zero;
      if (alt != 0)
        mu2 = config.fixed_alternative ? fixed_mu
                                       : make_alternative(alt, sparsity, sigma, run.child("alternative")).mu2;
      const DataMatrix x = sample_dataset(config.n1, zero, sigma, run.child("x"));
      const DataMatrix y = sample_dataset(config.n2, mu2, sigma, run.child("y"));
      const SufficientStats stats = summarize(x, y);
      for (std::size_t j = 0; j < nm; ++j) {
        bool reject = false;
        switch (table.methods[j]) {
          case Method::raptt_haar:
          case Method::raptt_block: {
            RapttConfig rc = raptt_configs[j];
            rc.seed = run.child("projections", j).stream_id();
            reject = raptt_test(stats, rc, cals[j]).reject;
            break;
          }
          case Method::cq:
            reject = cq_test(x, y).rejects(config.alpha);
            break;
          case Method::sd:
            reject = sd_test(stats).rejects(config.alpha);
            break;
          case Method::bs:
            reject = bs_test(stats).rejects(config.alpha);
            break;
        }
        rejected[r * nm + j] = reject ? 1 : 0;
      }
    });

    PowerRow row;
    row.alternative = alt;
    row.sparsity = sparsity;
    row.cells.assign(nm, PowerCell{0, static_cast<long>(config.runs)});
    for (std::size_t r = 0; r < static_cast<std::size_t>(config.runs); ++r)
      for (std::size_t j = 0; j < nm; ++j) row.cells[j].rejections += rejected[r * nm + j];
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Ratio of single-projection power at the selected k to the best power over a k grid

struct KRatioRow {
  int sigma_id = 1;
  int alternative = 1;
  double sparsity = 0.0;
  Eigen::Index k_star = 0;
  std::vector<double> power;  // aligned with KRatioTable::k_grid
  double ratio = 0.0;
};

struct KRatioTable {
  ExperimentConfig config;
  std::vector<Eigen::Index> k_grid;  // sorted, contains k_star
  std::vector<KRatioRow> rows;

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream out;
    for (const auto& [key, v] : config_entries(config)) out << "# " << key << "=" << v << "\n";
    out << "sigma,alternative,nonzero,k_star";
    for (Eigen::Index k : k_grid) out << ",power_k" << k;
    out << ",ratio\n" << std::setprecision(10);
    for (const auto& row : rows) {
      out << row.sigma_id << "," << row.alternative << "," << 100.0 * row.sparsity << "%," << row.k_star;
      for (double pw : row.power) out << "," << pw;
      out << "," << row.ratio << "\n";
    }
    return out.str();
  }

  [[nodiscard]] std::string to_text() const {
    std::ostringstream out;
    out << "Power ratio, selected k vs best k on the grid, p=" << config.p << ", n1=" << config.n1
        << ", n2=" << config.n2 << ", runs=" << config.runs << ", projection=" << to_string(config.projection)
        << ", seed=" << config.seed << "\n";
    out << std::left << std::setw(8) << "Sigma" << std::setw(6) << "Alt" << std::setw(10) << "nonzero";
    for (Eigen::Index k : k_grid) out << std::right << std::setw(9) << ("k=" + std::to_string(k));
    out << std::right << std::setw(9) << "ratio" << "\n" << std::fixed << std::setprecision(3);
    for (const auto& row : rows) {
      std::ostringstream nz;
      nz << std::setprecision(6) << 100.0 * row.sparsity << "%";
      out << std::left << std::setw(8) << row.sigma_id << std::setw(6) << row.alternative << std::setw(10)
          << nz.str();
      for (double pw : row.power) out << std::right << std::setw(9) << pw;
      out << std::right << std::setw(9) << row.ratio << "\n";
    }
    return out.str();
  }
};

inline KRatioTable k_ratio_experiment(const ExperimentConfig& config) {
  detail::validate_experiment(config);
  if (config.k_grid.empty()) throw DomainError("k_ratio_experiment: empty k grid");
  const Eigen::Index n = config.n1 + config.n2 - 2;
  const Eigen::Index k_star = choose_k(config.n1, config.n2, config.alpha);

  KRatioTable table;
  table.config = config;
  table.k_grid = config.k_grid;
  if (std::find(table.k_grid.begin(), table.k_grid.end(), k_star) == table.k_grid.end())
    table.k_grid.push_back(k_star);
  std::sort(table.k_grid.begin(), table.k_grid.end());
  table.k_grid.erase(std::unique(table.k_grid.begin(), table.k_grid.end()), table.k_grid.end());
  for (Eigen::Index k : table.k_grid)
    if (k < 1 || k >= n)
      throw DomainError("k grid value " + std::to_string(k) + " outside 1..n-1 with n=" + std::to_string(n));
  const std::size_t nk = table.k_grid.size();
  const std::size_t star =
      static_cast<std::size_t>(std::find(table.k_grid.begin(), table.k_grid.end(), k_star) - table.k_grid.begin());

  const std::vector<int> sigma_ids = config.sigma_ids.empty() ? std::vector<int>{config.sigma_id} : config.sigma_ids;
  const StreamKey root(config.seed);
  std::size_t cell_index = 0;
  for (int sid : sigma_ids) {
    const CovarianceSpec sigma = make_sigma(sid, config.p);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(config.p);
    for (int alt : config.alternatives) {
      for (double sparsity : config.sparsities) {
        const StreamKey cell_key = root.child("cell", cell_index++);
        Eigen::VectorXd fixed_mu;
        if (config.fixed_alternative)
          fixed_mu = make_alternative(alt, sparsity, sigma, cell_key.child("alternative")).mu2;
        // Common random numbers: every k sees the same datasets.
        std::vector<unsigned char> rejected(static_cast<std::size_t>(config.runs) * nk, 0);
        parallel_for(static_cast<std::size_t>(config.runs), config.threads, [&](std::size_t r) {
          const StreamKey run = cell_key.child("run", r);
          const Eigen::VectorXd mu2 = config.fixed_alternative
                                          ? fixed_mu
                                          : make_alternative(alt, sparsity, sigma, run.child("alternative")).mu2;
          const SufficientStats stats = summarize(sample_dataset(config.n1, zero, sigma, run.child("x")),
                                                  sample_dataset(config.n2, mu2, sigma, run.child("y")));
          for (std::size_t j = 0; j < nk; ++j) {
            const detail::PValueSampler sampler(stats, table.k_grid[j], config.projection);
            const double pv = sampler.pvalue(run.child("projection", static_cast<std::uint64_t>(table.k_grid[j])));
            rejected[r * nk + j] = pv < config.alpha ? 1 : 0;
          }
        });
        KRatioRow row;
        row.sigma_id = sid;
        row.alternative = alt;
        row.sparsity = sparsity;
        row.k_star = k_star;
        row.power.assign(nk, 0.0);
        for (std::size_t r = 0; r < static_cast<std::size_t>(config.runs); ++r)
          for (std::size_t j = 0; j < nk; ++j) row.power[j] += rejected[r * nk + j];
        for (double& pw : row.power) pw /= static_cast<double>(config.runs);
        const double best = *std::max_element(row.power.begin(), row.power.end());
        row.ratio = best > 0.0 ? row.power[star] / best : 1.0;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

}  // namespace raptt
