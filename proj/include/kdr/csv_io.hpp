#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kdr/dataset.hpp"
#include "kdr/error.hpp"

// Comma-separated numeric tables. The first row is a header iff any of its
// cells is not a number. Values are written in the shortest form that reads
// back to the identical double.

namespace kdr {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Eigen::MatrixXd values;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Parses a CSV stream. `source` names the input in error messages.
inline CsvTable parse_csv(std::istream& in, const std::string& source = "<csv>") {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_row(line);
    if (first) {
      width = cells.size();
      first = false;
      bool numeric = true;
      double dummy = 0.0;
      for (auto c : cells) numeric = numeric && detail::parse_number(c, dummy);
      if (!numeric) {
        for (auto c : cells) table.header.emplace_back(c);
        continue;
      }
    }
    if (cells.size() != width) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " fields, found " + std::to_string(cells.size()),
                       line_no);
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!detail::parse_number(cells[j], row[j])) {
        throw ParseError(source + ":" + std::to_string(line_no) + ": column " + std::to_string(j + 1) +
                             ": not a number: '" + std::string(cells[j]) + "'",
                         line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows", 0);
  table.values.resize(static_cast<long>(rows.size()), static_cast<long>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) table.values(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return table;
}

/// Column index named by `selector`: a header name, or else a 0-based index.
inline long resolve_column(const CsvTable& table, const std::string& selector) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == selector) return static_cast<long>(j);
  }
  long idx = -1;
  const char* end = selector.data() + selector.size();
  auto [ptr, ec] = std::from_chars(selector.data(), end, idx);
  if (ec == std::errc() && ptr == end && idx >= 0 && idx < table.values.cols()) return idx;
  throw ParseError("response column '" + selector + "' not found", 0);
}

/// Splits a table into covariates and a single response column.
inline Dataset split_response(const CsvTable& table, const std::string& selector) {
  const long r = resolve_column(table, selector);
  const long n = table.values.rows();
  const long cols = table.values.cols();
  if (cols < 2) throw ParseError("need at least one covariate column besides the response", 0);
  Dataset d;
  d.y = table.values.col(r);
  d.x.resize(n, cols - 1);
  for (long j = 0, k = 0; j < cols; ++j) {
    if (j != r) d.x.col(k++) = table.values.col(j);
  }
  return d;
}

inline Dataset read_csv(const std::string& path, const std::string& response) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return split_response(parse_csv(in, path), response);
}

inline void write_csv(std::ostream& out, Eigen::Ref<const Eigen::MatrixXd> values,
                      const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (long i = 0; i < values.rows(); ++i) {
    for (long j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
}

/// Covariates followed by responses, headed x1..xm,y (or y1..yq).
inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header;
  for (long j = 0; j < data.covariates(); ++j) header.push_back("x" + std::to_string(j + 1));
  for (long j = 0; j < data.responses(); ++j) {
    header.push_back(data.responses() == 1 ? std::string("y") : "y" + std::to_string(j + 1));
  }
  Eigen::MatrixXd all(data.samples(), data.covariates() + data.responses());
  all << data.x, data.y;
  write_csv(out, all, header);
}

/// Ordered key=value lines.
class Manifest {
 public:
  void set(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  void set(std::string key, long value) { set(std::move(key), std::to_string(value)); }
  void set(std::string key, int value) { set(std::move(key), std::to_string(value)); }
  void set(std::string key, bool value) { set(std::move(key), std::string(value ? "true" : "false")); }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  }

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string join_doubles(const std::vector<double>& v, char sep = ';') {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? std::string(1, sep) : "") << format_double(v[i]);
  return s.str();
}

}  // namespace kdr
