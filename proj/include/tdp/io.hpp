// Copyright 2026 The tdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV ingestion for risk tables, data distributions and metric graphs.
// Fields are comma-separated and whitespace-trimmed; blank lines and lines
// starting with '#' are skipped. Error messages carry "source:line".

#ifndef TDP_IO_HPP_
#define TDP_IO_HPP_

#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/graph.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/spaces.hpp"

namespace tdp::io {

struct CsvRow {
  std::size_t line = 0;  // 1-based
  std::vector<std::string> fields;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline Error parse_error(std::string_view source, std::size_t line, const std::string& what) {
  return Error(ErrorCode::kParseError, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++line_no;
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    const std::string_view content = detail::trim(line);
    if (content.empty() || content.front() == '#') continue;
    CsvRow row{line_no, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = content.find(',', start);
      row.fields.emplace_back(detail::trim(content.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double parse_number(std::string_view field, std::string_view source, std::size_t line) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(value)) {
    throw detail::parse_error(source, line, "expected a finite number, got '" + std::string(field) + "'");
  }
  return value;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "failed reading '" + path.string() + "'");
  return buffer.str();
}

// Header: w_label, x1, x2, ...; then one row per output with nonnegative risks.
inline RiskTable parse_risk_table(std::string_view text, std::string_view source = "risk") {
  const std::vector<CsvRow> rows = parse_csv(text);
  if (rows.size() < 2) throw detail::parse_error(source, rows.empty() ? 1 : rows.back().line, "need a header and at least one row");
  const CsvRow& header = rows.front();
  if (header.fields.size() < 2) throw detail::parse_error(source, header.line, "header needs at least one data label");
  std::vector<std::string> x_labels(header.fields.begin() + 1, header.fields.end());
  std::vector<std::string> w_labels;
  Matrix values(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(x_labels.size()));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    if (row.fields.size() != header.fields.size()) {
      throw detail::parse_error(source, row.line, "expected " + std::to_string(header.fields.size()) +
                                                      " fields, got " + std::to_string(row.fields.size()));
    }
    w_labels.push_back(row.fields[0]);
    for (std::size_t j = 1; j < row.fields.size(); ++j) {
      const double v = parse_number(row.fields[j], source, row.line);
      if (v < 0) throw detail::parse_error(source, row.line, "risk values must be nonnegative");
      values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = v;
    }
  }
  try {
    return RiskTable(FiniteSpace(std::move(w_labels)), FiniteSpace(std::move(x_labels)), std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, std::string(source) + ": " + e.what());
  }
}

// Either "label,weight" rows, or "label" rows (one unit-weight atom each).
// Labels of the space that are not listed get weight zero.
inline Distribution parse_distribution(std::string_view text, const FiniteSpace& space,
                                       std::string_view source = "data") {
  const std::vector<CsvRow> rows = parse_csv(text);
  if (rows.empty()) throw detail::parse_error(source, 1, "empty data file");
  const CsvRow& header = rows.front();
  bool weighted = false;
  if (header.fields.size() == 2 && header.fields[0] == "label" && header.fields[1] == "weight") {
    weighted = true;
  } else if (!(header.fields.size() == 1 && header.fields[0] == "label")) {
    throw detail::parse_error(source, header.line, "header must be 'label,weight' or 'label'");
  }
  Vector raw = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    if (row.fields.size() != (weighted ? 2u : 1u)) {
      throw detail::parse_error(source, row.line, weighted ? "expected 'label,weight'" : "expected a single label");
    }
    const auto index = space.find(row.fields[0]);
    if (!index) throw detail::parse_error(source, row.line, "unknown label '" + row.fields[0] + "'");
    if (!weighted) {
      raw[static_cast<Eigen::Index>(*index)] += 1.0;  // a repeated label is a repeated atom
      continue;
    }
    if (!seen.insert(row.fields[0]).second) {
      throw detail::parse_error(source, row.line, "duplicate label '" + row.fields[0] + "'");
    }
    const double w = parse_number(row.fields[1], source, row.line);
    if (w < 0) throw detail::parse_error(source, row.line, "weights must be nonnegative");
    raw[static_cast<Eigen::Index>(*index)] = w;
  }
  try {
    return make_distribution(space, raw);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, std::string(source) + ": " + e.what());
  }
}

// Header: u,v,length.
inline MetricGraph parse_graph(std::string_view text, const FiniteSpace& space,
                               std::string_view source = "graph") {
  const std::vector<CsvRow> rows = parse_csv(text);
  if (rows.empty()) throw detail::parse_error(source, 1, "empty graph file");
  const CsvRow& header = rows.front();
  if (header.fields != std::vector<std::string>{"u", "v", "length"}) {
    throw detail::parse_error(source, header.line, "header must be 'u,v,length'");
  }
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    if (row.fields.size() != 3) throw detail::parse_error(source, row.line, "expected 'u,v,length'");
    const auto u = space.find(row.fields[0]);
    const auto v = space.find(row.fields[1]);
    if (!u || !v) throw detail::parse_error(source, row.line, "unknown vertex label");
    const double length = parse_number(row.fields[2], source, row.line);
    if (!(length > 0)) throw detail::parse_error(source, row.line, "edge length must be positive");
    if (*u == *v) throw detail::parse_error(source, row.line, "self-loop");
    edges.push_back({*u, *v, length});
  }
  // Structural problems (duplicates, disconnection) keep their own codes.
  return MetricGraph(space, std::move(edges));
}

// Writers, used for fixtures and round trips. Values use 17 significant digits.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_risk_table(const RiskTable& risk) {
  std::string out = "w";
  for (const auto& x : risk.data().labels()) out += "," + x;
  out += "\n";
  for (std::size_t w = 0; w < risk.outputs().size(); ++w) {
    out += risk.outputs().label(w);
    for (std::size_t x = 0; x < risk.data().size(); ++x) out += "," + format_number(risk(w, x));
    out += "\n";
  }
  return out;
}

inline std::string format_graph(const MetricGraph& graph) {
  std::string out = "u,v,length\n";
  for (const Edge& e : graph.edges()) {
    out += graph.space().label(e.u) + "," + graph.space().label(e.v) + "," + format_number(e.length) + "\n";
  }
  return out;
}

}  // namespace tdp::io

#endif  // TDP_IO_HPP_
