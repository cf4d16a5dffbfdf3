#pragma once

// Labelled result tables and their text, JSON and CSV renderings.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrace/error.hpp"

namespace mrace {

using Cell = std::variant<double, std::int64_t, std::string>;

struct ReportRow {
  std::string label;
  std::vector<Cell> cells;
};

struct OutputReport {
  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<ReportRow> results;
  std::string method;
  std::optional<double> error_bound;  // quadrature bound
  std::optional<double> stderr_est;   // Monte Carlo standard error, scalar reports
};

enum class ReportFormat { Table, Json, Csv };

/// Shortest decimal that reads back to v.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Fixed notation; glibc rounds the exact binary value half-to-even.
inline std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return shortest(v);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::string cell_text(const Cell& c, int digits) {
  if (const auto* d = std::get_if<double>(&c)) return fixed(*d, digits);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

/// Goals print as integers when they are integers.
inline Cell goal_cell(double g) {
  if (g == std::floor(g) && std::fabs(g) < 9.0e15) return static_cast<std::int64_t>(g);
  return shortest(g);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

inline std::string format_table(const OutputReport& r, int digits) {
  std::size_t label_w = 0;
  std::size_t ncols = 0;
  for (const auto& row : r.results) {
    label_w = std::max(label_w, row.label.size());
    ncols = std::max(ncols, row.cells.size());
  }
  std::vector<std::size_t> width(ncols, 0);
  std::vector<std::vector<std::string>> text;
  for (const auto& row : r.results) {
    auto& t = text.emplace_back();
    for (std::size_t j = 0; j < row.cells.size(); ++j) {
      t.push_back(cell_text(row.cells[j], digits));
      width[j] = std::max(width[j], t.back().size());
    }
  }
  std::string out;
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    std::string line = r.results[i].label;
    line.append(label_w - line.size(), ' ');
    for (std::size_t j = 0; j < text[i].size(); ++j) {
      line.append(2 + width[j] - text[i][j].size(), ' ');
      line += text[i][j];
    }
    out += line + '\n';
  }
  if (r.error_bound && *r.error_bound > 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", *r.error_bound);
    out += "error bound: " + std::string(buf) + " (" + r.method + ")\n";
  }
  return out;
}

inline std::string format_csv(const OutputReport& r, int digits) {
  std::string out;
  for (const auto& row : r.results) {
    out += csv_field(row.label);
    for (const auto& c : row.cells) out += ',' + csv_field(cell_text(c, digits));
    out += '\n';
  }
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const OutputReport& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["inputs"] = r.inputs;
  j["method"] = r.method;
  if (r.error_bound) j["error_bound"] = *r.error_bound;
  if (r.stderr_est) j["stderr"] = *r.stderr_est;
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  for (const auto& row : r.results) {
    if (row.cells.size() == 1) {
      res[row.label] = detail::cell_json(row.cells[0]);
    } else {
      auto& arr = res[row.label] = nlohmann::ordered_json::array();
      for (const auto& c : row.cells) arr.push_back(detail::cell_json(c));
    }
  }
  j["results"] = std::move(res);
  return j;
}

/// Table and CSV print floats fixed to `digits` places; JSON keeps full precision.
inline std::string format_report(const OutputReport& r, ReportFormat fmt, int digits = 6) {
  if (digits < 0 || digits > 17) throw ValidationError("digits must be in 0..17");
  switch (fmt) {
    case ReportFormat::Table: return detail::format_table(r, digits);
    case ReportFormat::Csv: return detail::format_csv(r, digits);
    case ReportFormat::Json: return report_json(r).dump(2) + '\n';
  }
  return {};
}

}  // namespace mrace
