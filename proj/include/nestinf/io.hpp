/*
   Copyright 2026 nestinf contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// CSV ingestion for nested datasets and summary tables, plus atomic file
// output. Dialect: comma-separated, mandatory header row, UTF-8, '.'
// decimal separator, no quoting, no locale handling.

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nestinf/effect.hpp"
#include "nestinf/errors.hpp"

namespace nestinf {

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text, std::string source) {
  CsvTable table;
  table.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const bool is_last = end == text.size();
    if (!(line.empty() && is_last)) {
      if (line.empty())
        throw ParseError(table.source + ":" + std::to_string(line_no) +
                             ": empty line",
                         line_no);
      auto fields = detail::split_fields(line);
      if (table.header.empty()) {
        table.header = std::move(fields);
      } else {
        if (fields.size() != table.header.size())
          throw ParseError(table.source + ":" + std::to_string(line_no) +
                               ": expected " +
                               std::to_string(table.header.size()) +
                               " fields, got " + std::to_string(fields.size()),
                           line_no);
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
      }
    }
    if (is_last) break;
    pos = end + 1;
  }
  if (table.header.empty())
    throw ParseError(table.source + ": missing header row");
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

inline std::size_t find_column(const CsvTable& table, std::string_view name) {
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return i;
  throw ParseError(table.source + ": missing required column '" +
                   std::string(name) + "'");
}

inline double parse_double(const CsvTable& table, std::size_t row,
                           std::size_t col) {
  const std::string& field = table.rows[row][col];
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw ParseError(table.source + ":" +
                         std::to_string(table.line_numbers[row]) +
                         ": invalid number '" + field + "' in column '" +
                         table.header[col] + "'",
                     table.line_numbers[row]);
  return value;
}

// ---- nested dataset shapes -------------------------------------------------
//
// Subjects are grouped on load and emitted sorted by subject_id, so row
// order in the input never affects downstream results.

struct SubjectSamples {
  std::string id;
  std::vector<double> values;
};

struct SubjectPairs {
  std::string id;
  PairedData pairs;
};

struct SubjectTwoSample {
  std::string id;
  TwoSampleData data;
};

struct SubjectRegression {
  std::string id;
  RegressionData data;
};

/// Long form without conditions: columns (subject_id, value).
inline std::vector<SubjectSamples> load_value_rows(const CsvTable& table) {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t value_col = find_column(table, "value");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    groups[table.rows[r][id_col]].push_back(parse_double(table, r, value_col));
  std::vector<SubjectSamples> out;
  out.reserve(groups.size());
  for (auto& [id, values] : groups) out.push_back({id, std::move(values)});
  return out;
}

/// Wide paired form: columns (subject_id, x, y).
inline std::vector<SubjectPairs> load_paired_rows(const CsvTable& table) {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t x_col = find_column(table, "x");
  const std::size_t y_col = find_column(table, "y");
  std::map<std::string, PairedData> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    PairedData& g = groups[table.rows[r][id_col]];
    g.x.push_back(parse_double(table, r, x_col));
    g.y.push_back(parse_double(table, r, y_col));
  }
  std::vector<SubjectPairs> out;
  out.reserve(groups.size());
  for (auto& [id, pairs] : groups) out.push_back({id, std::move(pairs)});
  return out;
}

/// Long two-condition form: columns (subject_id, condition, value), with
/// condition equal to one of the two class labels.
inline std::vector<SubjectTwoSample> load_two_sample_rows(
    const CsvTable& table, std::string_view class_x = "X",
    std::string_view class_y = "Y") {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t cond_col = find_column(table, "condition");
  const std::size_t value_col = find_column(table, "value");
  std::map<std::string, TwoSampleData> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& cond = table.rows[r][cond_col];
    TwoSampleData& g = groups[table.rows[r][id_col]];
    if (cond == class_x)
      g.x.push_back(parse_double(table, r, value_col));
    else if (cond == class_y)
      g.y.push_back(parse_double(table, r, value_col));
    else
      throw ParseError(table.source + ":" +
                           std::to_string(table.line_numbers[r]) +
                           ": unknown condition '" + cond + "' (expected '" +
                           std::string(class_x) + "' or '" +
                           std::string(class_y) + "')",
                       table.line_numbers[r]);
  }
  std::vector<SubjectTwoSample> out;
  out.reserve(groups.size());
  for (auto& [id, data] : groups) out.push_back({id, std::move(data)});
  return out;
}

/// Regression form: columns (subject_id, y, <predictors...>). Predictor
/// columns keep their header order; the intercept is implicit.
inline std::vector<SubjectRegression> load_regression_rows(
    const CsvTable& table) {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t y_col = find_column(table, "y");
  std::vector<std::size_t> pred_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (i != id_col && i != y_col) pred_cols.push_back(i);
  if (pred_cols.empty())
    throw ParseError(table.source + ": regression input needs at least one "
                     "predictor column");
  std::map<std::string, RegressionData> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    RegressionData& g = groups[table.rows[r][id_col]];
    g.n_predictors = pred_cols.size();
    g.response.push_back(parse_double(table, r, y_col));
    for (std::size_t c : pred_cols)
      g.predictors.push_back(parse_double(table, r, c));
  }
  std::vector<SubjectRegression> out;
  out.reserve(groups.size());
  for (auto& [id, data] : groups) out.push_back({id, std::move(data)});
  return out;
}

/// Pre-computed per-subject summaries: columns (subject_id, theta_hat,
/// var_hat[, n]).
struct SummaryRow {
  std::string id;
  double theta_hat = 0.0;
  double var_hat = 0.0;
  std::optional<double> n;
};

inline std::vector<SummaryRow> load_summary_table(const CsvTable& table) {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t theta_col = find_column(table, "theta_hat");
  const std::size_t var_col = find_column(table, "var_hat");
  std::optional<std::size_t> n_col;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == "n") n_col = i;

  std::map<std::string, SummaryRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    SummaryRow row;
    row.id = table.rows[r][id_col];
    row.theta_hat = parse_double(table, r, theta_col);
    row.var_hat = parse_double(table, r, var_col);
    if (!(row.var_hat > 0.0))
      throw ParseError(table.source + ":" +
                           std::to_string(table.line_numbers[r]) +
                           ": var_hat must be > 0",
                       table.line_numbers[r]);
    if (n_col) row.n = parse_double(table, r, *n_col);
    if (rows.count(row.id))
      throw ParseError(table.source + ":" +
                           std::to_string(table.line_numbers[r]) +
                           ": duplicate subject_id '" + row.id + "'",
                       table.line_numbers[r]);
    rows[row.id] = std::move(row);
  }
  std::vector<SummaryRow> out;
  out.reserve(rows.size());
  for (auto& [id, row] : rows) out.push_back(std::move(row));
  return out;
}

/// One-sided p-values: columns (subject_id, p_one_sided), each strictly in
/// (0, 1).
inline std::vector<std::pair<std::string, double>> load_p_values(
    const CsvTable& table) {
  const std::size_t id_col = find_column(table, "subject_id");
  const std::size_t p_col = find_column(table, "p_one_sided");
  std::vector<std::pair<std::string, double>> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double p = parse_double(table, r, p_col);
    if (!(p > 0.0) || !(p < 1.0))
      throw ParseError(table.source + ":" +
                           std::to_string(table.line_numbers[r]) +
                           ": p_one_sided must lie strictly in (0, 1)",
                       table.line_numbers[r]);
    out.emplace_back(table.rows[r][id_col], p);
  }
  return out;
}

// ---- output ----------------------------------------------------------------

/// Shortest representation that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes via a temporary file in the same directory and renames it into
/// place, so a failed run never leaves a partial output file.
inline void atomic_write_file(const std::filesystem::path& path,
                              std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nestinf
