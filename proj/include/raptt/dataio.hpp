#pragma once

// Delimited-text ingestion for two-sample data. Rows are observations.
// Either one file with a group-label column or one file per group.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "raptt/error.hpp"
#include "raptt/linstat.hpp"

namespace raptt {

enum class Transform { none, log };

struct IngestOptions {
  char delimiter = ',';
  bool has_header = false;
  // Label column: a zero-based index or a header name. Unset means two-file mode.
  std::optional<std::string> label_column;
  // Label of the first group; unset means the label seen first.
  std::optional<std::string> x_label;
  Transform transform = Transform::none;
};

struct TwoSample {
  DataMatrix x;
  DataMatrix y;
  std::string x_label;
  std::string y_label;
};

namespace detail {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

inline std::string strip_cell(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (e - b >= 2 && s[b] == '"' && s[e - 1] == '"') {
    ++b;
    --e;
  }
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {  // runs of whitespace
    std::istringstream in(line);
    std::string cell;
    while (in >> cell) out.push_back(cell);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(strip_cell(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline RawTable read_table(const std::filesystem::path& path, char delim, bool has_header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file " + path.string());
  RawTable t;
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line, delim);
    if (header_pending) {
      t.header = std::move(cells);
      width = t.header.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": ragged row with " +
                        std::to_string(cells.size()) + " fields, expected " + std::to_string(width));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (t.rows.empty()) throw DomainError(path.string() + ": no data rows");
  return t;
}

inline double parse_cell(const std::string& s, const std::filesystem::path& path, int line, std::size_t col) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != e)
    throw DomainError(path.string() + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) +
                      ": non-numeric cell '" + s + "'");
  return v;
}

inline double transform_value(double v, Transform t, const std::filesystem::path& path, int line,
                              std::size_t col) {
  if (t == Transform::none) return v;
  if (!(v > 0.0))
    throw DomainError(path.string() + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) +
                      ": log transform needs positive values, got " + std::to_string(v));
  return std::log(v);
}

inline Eigen::MatrixXd numeric_block(const RawTable& t, const std::filesystem::path& path,
                                     const std::vector<std::size_t>& rows, std::optional<std::size_t> skip,
                                     Transform tr) {
  const std::size_t width = t.rows.front().size() - (skip ? 1 : 0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cells = t.rows[rows[i]];
    std::size_t j = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (skip && c == *skip) continue;
      const int line = t.line_numbers[rows[i]];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j++)) =
          transform_value(parse_cell(cells[c], path, line, c), tr, path, line, c);
    }
  }
  return out;
}

inline std::size_t resolve_label_column(const RawTable& t, const std::string& spec) {
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c] == spec) return c;
  std::size_t idx = 0;
  const auto res = std::from_chars(spec.data(), spec.data() + spec.size(), idx);
  if (res.ec != std::errc() || res.ptr != spec.data() + spec.size())
    throw DomainError("label column '" + spec + "' is neither a header name nor an index");
  if (idx >= t.rows.front().size())
    throw DomainError("label column index " + spec + " out of range");
  return idx;
}

}  // namespace detail

// One file, rows split into two groups by the label column.
inline TwoSample ingest_labeled(const std::filesystem::path& path, const IngestOptions& opts) {
  if (!opts.label_column) throw DomainError("ingest_labeled: no label column given");
  const auto t = detail::read_table(path, opts.delimiter, opts.has_header);
  const std::size_t col = detail::resolve_label_column(t, *opts.label_column);
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& lab = t.rows[i][col];
    auto it = std::find(labels.begin(), labels.end(), lab);
    if (it == labels.end()) {
      labels.push_back(lab);
      members.emplace_back();
      it = labels.end() - 1;
    }
    members[static_cast<std::size_t>(it - labels.begin())].push_back(i);
  }
  if (labels.size() != 2)
    throw DomainError(path.string() + ": expected exactly two groups in the label column, found " +
                      std::to_string(labels.size()));
  std::size_t first = 0;
  if (opts.x_label) {
    const auto it = std::find(labels.begin(), labels.end(), *opts.x_label);
    if (it == labels.end()) throw DomainError("label '" + *opts.x_label + "' does not occur in " + path.string());
    first = static_cast<std::size_t>(it - labels.begin());
  }
  const std::size_t second = 1 - first;
  return TwoSample{DataMatrix(detail::numeric_block(t, path, members[first], col, opts.transform)),
                   DataMatrix(detail::numeric_block(t, path, members[second], col, opts.transform)),
                   labels[first], labels[second]};
}

// One file per group, all columns numeric.
inline TwoSample ingest_pair(const std::filesystem::path& xpath, const std::filesystem::path& ypath,
                             const IngestOptions& opts) {
  const auto tx = detail::read_table(xpath, opts.delimiter, opts.has_header);
  const auto ty = detail::read_table(ypath, opts.delimiter, opts.has_header);
  std::vector<std::size_t> rx(tx.rows.size());
  std::vector<std::size_t> ry(ty.rows.size());
  for (std::size_t i = 0; i < rx.size(); ++i) rx[i] = i;
  for (std::size_t i = 0; i < ry.size(); ++i) ry[i] = i;
  DataMatrix x(detail::numeric_block(tx, xpath, rx, std::nullopt, opts.transform));
  DataMatrix y(detail::numeric_block(ty, ypath, ry, std::nullopt, opts.transform));
  if (x.p() != y.p())
    throw DimensionMismatch("group files differ in column count: " + std::to_string(x.p()) + " vs " +
                            std::to_string(y.p()));
  return TwoSample{std::move(x), std::move(y), xpath.filename().string(), ypath.filename().string()};
}

inline void write_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& labels = {}) {
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!labels.empty()) out << labels[static_cast<std::size_t>(i)] << ",";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << "\n";
  }
}

}  // namespace raptt
