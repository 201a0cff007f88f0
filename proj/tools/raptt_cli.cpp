// raptt: command-line front end.
//
// Every command prints its resolved configuration as a "# config" line,
// a human-readable result, and one JSON record per result. The exit code
// reports whether the computation succeeded, not the test decision.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raptt.hpp"

using namespace raptt;
using nlohmann::json;

namespace {

constexpr const char* kColonSource = "http://genomics-pubs.princeton.edu/oncology/affydata/index.html";

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 20130202;
  std::string cache_dir;
};

struct DataOptions {
  std::string data;
  std::string x;
  std::string y;
  std::string labels;
  std::string x_label;
  std::string delimiter = ",";
  bool header = false;
  bool log = false;
};

struct RapttOptions {
  Eigen::Index m = 500;
  Eigen::Index k = 0;
  Eigen::Index K = 2000;
  double alpha = 0.05;
  std::string projection = "haar";
  std::string calibration;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RAPTT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw DomainError(std::string("RAPTT_SEED is not an unsigned integer: ") + env);
    }
  }
  return 20130202;
}

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "one CSV holding both groups (needs --labels)");
  cmd->add_option("--x", d.x, "CSV for the first group");
  cmd->add_option("--y", d.y, "CSV for the second group");
  cmd->add_option("--labels", d.labels, "label column: header name or zero-based index");
  cmd->add_option("--x-label", d.x_label, "label value of the first group");
  cmd->add_option("--delimiter", d.delimiter, "field delimiter; 'space' for whitespace")->capture_default_str();
  cmd->add_flag("--header", d.header, "first row is a header");
  cmd->add_flag("--log", d.log, "natural-log transform every value");
}

void add_raptt_options(CLI::App* cmd, RapttOptions& r) {
  cmd->add_option("--m", r.m, "projections per dataset")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--k", r.k, "projected dimension, 0 = choose_k")->capture_default_str();
  cmd->add_option("--K", r.K, "null datasets when calibrating on the fly")->capture_default_str();
  cmd->add_option("--alpha", r.alpha, "level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--calibration", r.calibration, "calibration file from `raptt calibrate`");
}

char parse_delimiter(const std::string& s) {
  if (s == "space" || s == " ") return ' ';
  if (s == "tab" || s == "\\t") return '\t';
  if (s.size() != 1) throw DomainError("delimiter must be one character, 'space' or 'tab'");
  return s[0];
}

TwoSample load_data(const DataOptions& d) {
  IngestOptions o;
  o.delimiter = parse_delimiter(d.delimiter);
  o.has_header = d.header;
  o.transform = d.log ? Transform::log : Transform::none;
  if (!d.x_label.empty()) o.x_label = d.x_label;
  if (!d.data.empty()) {
    if (d.labels.empty()) throw DomainError("--data needs --labels");
    o.label_column = d.labels;
    return ingest_labeled(d.data, o);
  }
  if (d.x.empty() || d.y.empty()) throw DomainError("give either --data with --labels, or both --x and --y");
  return ingest_pair(d.x, d.y, o);
}

std::string data_echo(const DataOptions& d) {
  std::ostringstream out;
  if (!d.data.empty())
    out << " data=" << d.data << " labels=" << d.labels << (d.x_label.empty() ? "" : " x_label=" + d.x_label);
  else
    out << " x=" << d.x << " y=" << d.y;
  out << " delimiter=" << d.delimiter << " header=" << d.header << " log=" << d.log;
  return out.str();
}

std::string raptt_echo(const RapttOptions& r) {
  std::ostringstream out;
  out << " m=" << r.m << " k=" << r.k << " K=" << r.K << " alpha=" << r.alpha;
  if (!r.calibration.empty()) out << " calibration=" << r.calibration;
  return out.str();
}

void echo(const std::string& command, const Globals& g, const std::string& rest) {
  std::cout << "# config: command=" << command << " seed=" << g.seed << " threads=" << g.threads
            << (g.cache_dir.empty() ? "" : " cache_dir=" + g.cache_dir) << rest << "\n";
}

RapttConfig make_config(const RapttOptions& r, ProjectionKind kind, const Globals& g) {
  RapttConfig c;
  c.m = r.m;
  c.k = r.k;
  c.kind = kind;
  c.alpha = r.alpha;
  c.seed = g.seed;
  c.threads = g.threads;
  return c;
}

// Calibration from a file, the cache, or a fresh simulation.
NullCalibration obtain_calibration(const RapttOptions& r, const RapttConfig& config, Eigen::Index n1,
                                   Eigen::Index n2, Eigen::Index p, const Globals& g) {
  if (!r.calibration.empty()) return load_calibration(r.calibration);
  RapttConfig c = config;
  c.seed = detail::calibration_seed(g.seed, config.kind);
  if (!g.cache_dir.empty()) return load_or_calibrate(g.cache_dir, n1, n2, p, c, r.K);
  return calibrate_null(n1, n2, p, c, r.K);
}

void print_report_line(const TestReport& rep) {
  std::cout << std::left << std::setw(14) << rep.method << std::right << std::setw(12) << std::setprecision(6)
            << rep.statistic << std::setw(12) << rep.threshold << std::setw(12) << rep.pvalue << std::setw(10)
            << (rep.reject ? "reject" : "retain") << "\n";
}

void print_report_header() {
  std::cout << std::left << std::setw(14) << "method" << std::right << std::setw(12) << "statistic" << std::setw(12)
            << "threshold" << std::setw(12) << "pvalue" << std::setw(10) << "decision" << "\n";
}

void emit(json j, const std::string& command) {
  j["command"] = command;
  std::cout << j.dump() << "\n";
}

// ---------------------------------------------------------------------------

int run_choose_k(Eigen::Index n1, Eigen::Index n2, double alpha, bool curve, const Globals& g) {
  std::ostringstream rest;
  rest << " n1=" << n1 << " n2=" << n2 << " alpha=" << alpha;
  echo("choose-k", g, rest.str());
  const Eigen::Index k = choose_k(n1, n2, alpha);
  const Eigen::Index n = n1 + n2 - 2;
  std::cout << "k = " << k << "\n";
  json j{{"n1", n1}, {"n2", n2}, {"alpha", alpha}, {"k", k}, {"c_alpha", critical_value(k, n, alpha)}};
  if (curve) {
    std::cout << std::setw(6) << "k" << std::setw(16) << "c_alpha" << "\n";
    json pts = json::array();
    for (Eigen::Index kk = 1; kk < n; ++kk) {
      const double c = critical_value(kk, n, alpha);
      std::cout << std::setw(6) << kk << std::setw(16) << std::setprecision(8) << c << "\n";
      pts.push_back({{"k", kk}, {"c_alpha", c}});
    }
    j["curve"] = pts;
  }
  emit(j, "choose-k");
  return 0;
}

int run_calibrate(Eigen::Index n1, Eigen::Index n2, Eigen::Index p, const RapttOptions& r, int sigma, bool pooled,
                  const std::string& out, const Globals& g) {
  const ProjectionKind kind = parse_projection_kind(r.projection);
  std::ostringstream rest;
  rest << " n1=" << n1 << " n2=" << n2 << " p=" << p << " projection=" << r.projection << raptt_echo(r)
       << " sigma=" << sigma << " pooled=" << pooled << " out=" << out;
  echo("calibrate", g, rest.str());
  RapttConfig c = make_config(r, kind, g);
  c.k = resolve_k(c, n1, n2);
  NullCalibration cal;
  if (pooled)
    cal = pooled_calibration(n1, n2, p, c, r.K);
  else if (sigma != 1)
    cal = calibrate_with(n1, n2, p, c, r.K, sigma_null_generator(make_sigma(sigma, p), n1, n2));
  else
    cal = calibrate_null(n1, n2, p, c, r.K);
  save_calibration(cal, out);
  const double u = cutoff(cal, r.alpha);
  std::cout << "u_alpha = " << std::setprecision(6) << u << " (k=" << cal.k << ", m=" << cal.m << ", K=" << cal.K()
            << ")\n";
  emit({{"n1", n1}, {"n2", n2}, {"p", p}, {"k", cal.k}, {"m", cal.m}, {"K", cal.K()}, {"alpha", r.alpha},
        {"u_alpha", u}, {"projection", r.projection}, {"seed", g.seed}, {"out", out}},
       "calibrate");
  return 0;
}

int run_test(const DataOptions& d, const RapttOptions& r, const Globals& g) {
  echo("test", g, data_echo(d) + " projection=" + r.projection + raptt_echo(r));
  const TwoSample data = load_data(d);
  const SufficientStats stats = summarize(data.x, data.y);
  const RapttConfig c = make_config(r, parse_projection_kind(r.projection), g);
  const NullCalibration cal = obtain_calibration(r, c, stats.n1(), stats.n2(), stats.p(), g);
  const TestReport rep = raptt_test(stats, c, cal);
  std::cout << "groups: " << data.x_label << " (n=" << stats.n1() << ") vs " << data.y_label << " (n=" << stats.n2()
            << "), p=" << stats.p() << "\n";
  print_report_header();
  print_report_line(rep);
  emit(rep.to_json(), "test");
  return 0;
}

std::vector<TestReport> compare_all(const SufficientStats& stats, const DataMatrix& x, const DataMatrix& y,
                                    const RapttOptions& r, const Globals& g,
                                    const std::vector<NullCalibration>& cals) {
  std::vector<TestReport> out;
  for (std::size_t i = 0; i < 2; ++i) {
    const RapttConfig c = make_config(r, i == 0 ? ProjectionKind::haar : ProjectionKind::block, g);
    out.push_back(raptt_test(stats, c, cals[i]));
  }
  out.push_back(asymptotic_report("BS", bs_test(stats), r.alpha, stats.n1(), stats.n2(), stats.p()));
  out.push_back(asymptotic_report("CQ", cq_test(x, y), r.alpha, stats.n1(), stats.n2(), stats.p()));
  out.push_back(asymptotic_report("SD", sd_test(stats), r.alpha, stats.n1(), stats.n2(), stats.p()));
  return out;
}

std::vector<NullCalibration> calibrations_for(const RapttOptions& r, Eigen::Index n1, Eigen::Index n2,
                                              Eigen::Index p, const Globals& g) {
  if (!r.calibration.empty())
    throw DomainError("this command calibrates both projection kinds itself; use --cache-dir to reuse them");
  std::vector<NullCalibration> cals;
  for (ProjectionKind kind : {ProjectionKind::haar, ProjectionKind::block})
    cals.push_back(obtain_calibration(r, make_config(r, kind, g), n1, n2, p, g));
  return cals;
}

int run_compare(const DataOptions& d, const RapttOptions& r, const Globals& g) {
  echo("compare", g, data_echo(d) + raptt_echo(r));
  const TwoSample data = load_data(d);
  const SufficientStats stats = summarize(data.x, data.y);
  const auto cals = calibrations_for(r, stats.n1(), stats.n2(), stats.p(), g);
  std::cout << "groups: " << data.x_label << " (n=" << stats.n1() << ") vs " << data.y_label << " (n=" << stats.n2()
            << "), p=" << stats.p() << "\n";
  const auto reports = compare_all(stats, data.x, data.y, r, g, cals);
  print_report_header();
  for (const auto& rep : reports) print_report_line(rep);
  for (const auto& rep : reports) emit(rep.to_json(), "compare");
  return 0;
}

int run_power(Eigen::Index k, Eigen::Index n1, Eigen::Index n2, double alpha, const std::vector<double>& deltas,
              const Globals& g) {
  std::ostringstream rest;
  rest << " k=" << k << " n1=" << n1 << " n2=" << n2 << " alpha=" << alpha << " delta=";
  for (std::size_t i = 0; i < deltas.size(); ++i) rest << (i ? "," : "") << deltas[i];
  echo("power", g, rest.str());
  std::cout << std::setw(14) << "delta" << std::setw(16) << "power" << "\n";
  for (double delta : deltas) {
    const double pw = power_given_delta(PowerInputs{delta, k, n1, n2, alpha});
    std::cout << std::setw(14) << std::setprecision(6) << delta << std::setw(16) << std::setprecision(10) << pw
              << "\n";
    emit({{"k", k}, {"n1", n1}, {"n2", n2}, {"alpha", alpha}, {"delta", delta}, {"power", pw}}, "power");
  }
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out, const Globals& g,
                 const std::vector<std::string>& overrides, bool seed_given, bool threads_given) {
  std::ifstream in(config_path);
  if (!in) throw Error("cannot open config file " + config_path);
  std::ostringstream text;
  text << in.rdbuf();
  for (const auto& o : overrides) text << "\n" << o;
  ExperimentConfig c = parse_experiment_config(text.str());
  if (seed_given) c.seed = g.seed;
  if (threads_given) c.threads = g.threads;
  if (!g.cache_dir.empty()) c.cache_dir = g.cache_dir;
  std::cout << "# config: command=simulate file=" << config_path << (out.empty() ? "" : " out=" + out) << "\n";
  std::istringstream lines(format_config(c));
  for (std::string line; std::getline(lines, line);) std::cout << "# " << line << "\n";

  std::string csv;
  json record;
  if (c.experiment == "k_ratio") {
    const KRatioTable t = k_ratio_experiment(c);
    std::cout << t.to_text();
    csv = t.to_csv();
    json rows = json::array();
    for (const auto& row : t.rows)
      rows.push_back({{"sigma", row.sigma_id}, {"alternative", row.alternative}, {"sparsity", row.sparsity},
                      {"k_star", row.k_star}, {"power", row.power}, {"ratio", row.ratio}});
    record = {{"experiment", "k_ratio"}, {"k_grid", t.k_grid}, {"rows", rows}};
  } else {
    const PowerTable t = run_power_experiment(c);
    std::cout << t.to_text();
    csv = t.to_csv();
    json rows = json::array();
    for (const auto& row : t.rows) {
      json cells = json::object();
      for (std::size_t j = 0; j < t.methods.size(); ++j) cells[method_name(t.methods[j])] = row.cells[j].rate();
      rows.push_back({{"alternative", row.alternative}, {"sparsity", row.sparsity}, {"rates", cells}});
    }
    record = {{"experiment", "power"}, {"k", t.k}, {"rows", rows}};
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << csv;
  }
  record["seed"] = c.seed;
  emit(record, "simulate");
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Eigen::Index> draw_rows(Eigen::Index n, Eigen::Index take, const StreamKey& key) {
  const auto perm = random_permutation(static_cast<std::size_t>(n), key);
  std::vector<Eigen::Index> rows(perm.begin(), perm.begin() + take);
  std::sort(rows.begin(), rows.end());
  return rows;
}

int run_subsample(const DataOptions& d, const RapttOptions& r, double fraction, Eigen::Index repeats,
                  const Globals& g) {
  std::ostringstream rest;
  rest << data_echo(d) << raptt_echo(r) << " fraction=" << fraction << " repeats=" << repeats;
  echo("subsample", g, rest.str());
  const TwoSample data = load_data(d);
  const auto n1 = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(data.x.n())));
  const auto n2 = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(data.y.n())));
  if (n1 < 4 || n2 < 4) throw DomainError("subsample keeps fewer than 4 rows in a group");
  const Eigen::Index p = data.x.p();
  const auto cals = calibrations_for(r, n1, n2, p, g);

  const StreamKey root = StreamKey(g.seed).child("subsample");
  std::vector<std::vector<double>> pv(5, std::vector<double>(static_cast<std::size_t>(repeats)));
  Globals serial = g;
  serial.threads = 1;
  std::vector<std::vector<std::string>> method_names(static_cast<std::size_t>(repeats));
  parallel_for(static_cast<std::size_t>(repeats), g.threads, [&](std::size_t i) {
    const StreamKey key = root.child("repeat", i);
    const DataMatrix x(data.x.values()(draw_rows(data.x.n(), n1, key.child("x")), Eigen::all));
    const DataMatrix y(data.y.values()(draw_rows(data.y.n(), n2, key.child("y")), Eigen::all));
    Globals local = serial;
    local.seed = key.child("projections").stream_id();
    const auto reports = compare_all(summarize(x, y), x, y, r, local, cals);
    for (std::size_t j = 0; j < reports.size(); ++j) {
      pv[j][i] = reports[j].pvalue;
      method_names[i].push_back(reports[j].method);
    }
  });
  const std::vector<std::string>& names = method_names.front();
  std::cout << "subsample sizes: n1=" << n1 << " n2=" << n2 << ", repeats=" << repeats << "\n";
  std::cout << std::left << std::setw(14) << "method" << std::right << std::setw(16) << "median pvalue" << "\n";
  json medians = json::object();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const double med = median(pv[j]);
    std::cout << std::left << std::setw(14) << names[j] << std::right << std::setw(16) << std::setprecision(6) << med
              << "\n";
    medians[names[j]] = med;
  }
  emit({{"n1", n1}, {"n2", n2}, {"p", p}, {"fraction", fraction}, {"repeats", repeats}, {"median_pvalue", medians},
        {"seed", g.seed}},
       "subsample");
  return 0;
}

// The published colon files: a 2000 x 62 intensity matrix (genes by
// tissues, whitespace separated) and a list of 62 tissue ids where a
// negative id marks a tumor sample.
int run_fetch_colon(const std::string& matrix, const std::string& tissues, const std::string& out,
                    const Globals& g) {
  echo("fetch-colon", g, " matrix=" + matrix + " tissues=" + tissues + " out=" + out);
  std::cout << "source: " << kColonSource << " (files I2000 and tissues)\n";
  if (matrix.empty() || tissues.empty()) {
    std::cout << "download I2000 and tissues from the source page, then rerun with --matrix and --tissues\n";
    emit({{"source", kColonSource}, {"converted", false}}, "fetch-colon");
    return 0;
  }
  const auto table = detail::read_table(matrix, ' ', false);
  std::vector<std::size_t> rows(table.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Eigen::MatrixXd genes = detail::numeric_block(table, matrix, rows, std::nullopt, Transform::none);
  if (genes.rows() != 2000 || genes.cols() != 62)
    throw DomainError("expected a 2000 x 62 matrix, got " + std::to_string(genes.rows()) + " x " +
                      std::to_string(genes.cols()));
  std::ifstream tin(tissues);
  if (!tin) throw Error("cannot open " + tissues);
  std::vector<std::string> labels;
  for (std::string tok; tin >> tok;) {
    const long id = std::stol(tok);
    labels.push_back(id < 0 ? "tumor" : "normal");
  }
  const auto tumors = std::count(labels.begin(), labels.end(), "tumor");
  if (labels.size() != 62 || tumors != 40)
    throw DomainError("expected 62 tissues with 40 tumors, got " + std::to_string(labels.size()) + " with " +
                      std::to_string(tumors));
  std::filesystem::path dest(out);
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  std::ofstream f(dest);
  if (!f) throw Error("cannot write " + out);
  f << "tissue";
  for (int j = 1; j <= 2000; ++j) f << ",g" << j;
  f << "\n";
  write_csv(f, genes.transpose(), labels);
  std::cout << "wrote " << out << ": 62 tissues (40 tumor, 22 normal) x 2000 genes\n";
  emit({{"source", kColonSource}, {"converted", true}, {"out", out}, {"rows", 62}, {"genes", 2000}, {"tumor", 40},
        {"normal", 22}},
       "fetch-colon");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-projection Hotelling two-sample tests"};
  app.require_subcommand(1);
  Globals g;
  g.seed = 20130202;
  try {
    g.seed = default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed (default $RAPTT_SEED or 20130202)");
  auto* threads_opt = app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
  app.add_option("--cache-dir", g.cache_dir, "directory for reusable null calibrations");

  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  Eigen::Index p = 0;
  double alpha = 0.05;

  auto* choose = app.add_subcommand("choose-k", "projected dimension minimizing c_alpha");
  bool curve = false;
  choose->add_option("--n1", n1)->required();
  choose->add_option("--n2", n2)->required();
  choose->add_option("--alpha", alpha)->capture_default_str();
  choose->add_flag("--curve", curve, "print c_alpha for every k");

  RapttOptions ropts;
  auto* calibrate = app.add_subcommand("calibrate", "simulate the null law of the averaged p-value");
  std::string cal_out;
  int sigma = 1;
  bool pooled = false;
  calibrate->add_option("--n1", n1)->required();
  calibrate->add_option("--n2", n2)->required();
  calibrate->add_option("--p", p)->required();
  add_raptt_options(calibrate, ropts);
  calibrate->add_option("--projection", ropts.projection)->check(CLI::IsMember({"haar", "block"}))->capture_default_str();
  calibrate->add_option("--sigma", sigma, "null covariance 1..4")->check(CLI::Range(1, 4))->capture_default_str();
  calibrate->add_flag("--pooled", pooled, "pool K/4 draws under each of the four covariances");
  calibrate->add_option("--out", cal_out)->required();

  DataOptions dopts;
  auto* test = app.add_subcommand("test", "RAPTT on two samples");
  add_data_options(test, dopts);
  add_raptt_options(test, ropts);
  test->add_option("--projection", ropts.projection)->check(CLI::IsMember({"haar", "block"}))->capture_default_str();

  auto* compare = app.add_subcommand("compare", "RAPTT (both projections), BS, CQ and SD on the same data");
  add_data_options(compare, dopts);
  add_raptt_options(compare, ropts);

  auto* power = app.add_subcommand("power", "exact single-projection power for given noncentralities");
  Eigen::Index k = 0;
  std::vector<double> deltas;
  power->add_option("--k", k)->required();
  power->add_option("--n1", n1)->required();
  power->add_option("--n2", n2)->required();
  power->add_option("--alpha", alpha)->capture_default_str();
  power->add_option("--delta", deltas, "Delta_R values")->required()->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "power or k-ratio experiment from a config file");
  std::string config_path;
  std::string sim_out;
  std::vector<std::string> overrides;
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--out", sim_out, "write the CSV table here");
  simulate->add_option("--set", overrides, "override a config entry, key=value");

  auto* subsample = app.add_subcommand("subsample", "median p-values over random subsamples of each group");
  double fraction = 0.5;
  Eigen::Index repeats = 100;
  add_data_options(subsample, dopts);
  add_raptt_options(subsample, ropts);
  subsample->add_option("--fraction", fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  subsample->add_option("--repeats", repeats)->capture_default_str()->check(CLI::PositiveNumber);

  auto* fetch = app.add_subcommand("fetch-colon", "convert the published colon tissue files to one CSV");
  std::string matrix_path;
  std::string tissues_path;
  std::string colon_out = "data/colon.csv";
  fetch->add_option("--matrix", matrix_path, "the I2000 intensity matrix");
  fetch->add_option("--tissues", tissues_path, "the tissues id list");
  fetch->add_option("--out", colon_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*choose) return run_choose_k(n1, n2, alpha, curve, g);
    if (*calibrate) return run_calibrate(n1, n2, p, ropts, sigma, pooled, cal_out, g);
    if (*test) return run_test(dopts, ropts, g);
    if (*compare) return run_compare(dopts, ropts, g);
    if (*power) return run_power(k, n1, n2, alpha, deltas, g);
    if (*simulate)
      return run_simulate(config_path, sim_out, g, overrides, seed_opt->count() > 0 || std::getenv("RAPTT_SEED"),
                          threads_opt->count() > 0);
    if (*subsample) return run_subsample(dopts, ropts, fraction, repeats, g);
    if (*fetch) return run_fetch_colon(matrix_path, tissues_path, colon_out, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
