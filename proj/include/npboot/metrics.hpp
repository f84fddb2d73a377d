#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "npboot/errors.hpp"

namespace npboot {

/** Mean squared prediction error over paired replications. */
inline double mspe(std::span<const double> truths, std::span<const double> points) {
  if (truths.size() != points.size()) throw LengthMismatch(truths.size(), points.size());
  if (truths.empty()) throw EmptySample();
  double s = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double d = truths[i] - points[i];
    s += d * d;
  }
  return s / static_cast<double>(truths.size());
}

/** Fraction of truths inside their closed interval; boundary hits count. */
inline double coverage_rate(std::span<const double> truths,
                            std::span<const double> lowers,
                            std::span<const double> uppers) {
  if (truths.size() != lowers.size()) throw LengthMismatch(truths.size(), lowers.size());
  if (truths.size() != uppers.size()) throw LengthMismatch(truths.size(), uppers.size());
  if (truths.empty()) throw EmptySample();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truths.size(); ++i)
    if (truths[i] >= lowers[i] && truths[i] <= uppers[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

inline double mean_length(std::span<const double> lowers,
                          std::span<const double> uppers) {
  if (lowers.size() != uppers.size()) throw LengthMismatch(lowers.size(), uppers.size());
  if (lowers.empty()) throw EmptySample();
  double s = 0.0;
  for (std::size_t i = 0; i < lowers.size(); ++i) s += uppers[i] - lowers[i];
  return s / static_cast<double>(lowers.size());
}

struct MetricsCell {
  double mspe = std::numeric_limits<double>::quiet_NaN();
  double cvr = std::numeric_limits<double>::quiet_NaN();
  double len = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t completed = 0;
};

/**
 * One row per (method, horizon): squared-error of the point predictions,
 * empirical coverage, and mean width of the intervals, aggregated over the
 * replications that completed for that method.
 */
struct MetricsTable {
  std::string dgp;
  std::uint64_t seed = 0;
  std::size_t replications = 0;  // requested
  std::size_t horizons = 0;
  std::vector<std::string> methods;
  std::vector<MetricsCell> cells;  // method-major: cells[m * horizons + (j - 1)]
  std::uint64_t guard_events = 0;
  std::uint64_t failures = 0;

  const MetricsCell& cell(std::size_t method, std::size_t horizon) const {
    return cells[method * horizons + horizon - 1];
  }
  MetricsCell& cell(std::size_t method, std::size_t horizon) {
    return cells[method * horizons + horizon - 1];
  }
};

enum class TableFormat { csv, markdown, json };

namespace detail {

inline std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline bool low_completion(const MetricsTable& t, const MetricsCell& c) {
  return static_cast<double>(c.completed) <
         0.95 * static_cast<double>(t.replications);
}

}  // namespace detail

/**
 * Render the table.  csv and markdown fix the display precision (4 decimal
 * places for mspe, 3 for cvr, 2 for len) and keep the column order
 * (method, horizon, mspe, cvr, len).  Markdown flags methods that
 * completed fewer than 95% of the requested replications.  json carries
 * full-precision numbers and survives a round trip through
 * parse_table_json exactly.
 */
inline std::string emit_table(const MetricsTable& t, TableFormat format) {
  if (format == TableFormat::csv) {
    std::string out = "method,horizon,mspe,cvr,len,completed\n";
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
      for (std::size_t j = 1; j <= t.horizons; ++j) {
        const auto& c = t.cell(m, j);
        out += t.methods[m];
        out += ',' + std::to_string(j);
        out += ',' + detail::fixed(c.mspe, 4);
        out += ',' + detail::fixed(c.cvr, 3);
        out += ',' + detail::fixed(c.len, 2);
        out += ',' + std::to_string(c.completed);
        out += '\n';
      }
    }
    return out;
  }

  if (format == TableFormat::markdown) {
    std::string out = "| method | horizon | mspe | cvr | len |\n";
    out += "| --- | --- | --- | --- | --- |\n";
    bool any_low = false;
    for (std::size_t m = 0; m < t.methods.size(); ++m) {
      for (std::size_t j = 1; j <= t.horizons; ++j) {
        const auto& c = t.cell(m, j);
        const bool low = detail::low_completion(t, c);
        any_low = any_low || low;
        out += "| " + t.methods[m] + (low ? " \\*" : "");
        out += " | " + std::to_string(j);
        out += " | " + detail::fixed(c.mspe, 4);
        out += " | " + detail::fixed(c.cvr, 3);
        out += " | " + detail::fixed(c.len, 2);
        out += " |\n";
      }
    }
    out += "\ndgp " + t.dgp + ", N=" + std::to_string(t.replications) +
           ", seed " + std::to_string(t.seed) + "\n";
    if (any_low) out += "\\* method completed fewer than 95% of replications\n";
    return out;
  }

  nlohmann::ordered_json j;
  j["dgp"] = t.dgp;
  j["seed"] = t.seed;
  j["replications"] = t.replications;
  j["horizons"] = t.horizons;
  j["guard_events"] = t.guard_events;
  j["failures"] = t.failures;
  j["methods"] = t.methods;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    for (std::size_t h = 1; h <= t.horizons; ++h) {
      const auto& c = t.cell(m, h);
      nlohmann::ordered_json row;
      row["method"] = t.methods[m];
      row["horizon"] = h;
      row["mspe"] = std::isnan(c.mspe) ? nlohmann::ordered_json()
                                       : nlohmann::ordered_json(c.mspe);
      row["cvr"] = std::isnan(c.cvr) ? nlohmann::ordered_json()
                                     : nlohmann::ordered_json(c.cvr);
      row["len"] = std::isnan(c.len) ? nlohmann::ordered_json()
                                     : nlohmann::ordered_json(c.len);
      row["completed"] = c.completed;
      rows.push_back(std::move(row));
    }
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

inline MetricsTable parse_table_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MetricsTable t;
  t.dgp = j.at("dgp").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.replications = j.at("replications").get<std::size_t>();
  t.horizons = j.at("horizons").get<std::size_t>();
  t.guard_events = j.at("guard_events").get<std::uint64_t>();
  t.failures = j.at("failures").get<std::uint64_t>();
  t.methods = j.at("methods").get<std::vector<std::string>>();
  t.cells.resize(t.methods.size() * t.horizons);
  for (const auto& row : j.at("rows")) {
    const auto& name = row.at("method").get_ref<const std::string&>();
    std::size_t m = 0;
    while (m < t.methods.size() && t.methods[m] != name) ++m;
    if (m == t.methods.size()) throw ConfigError("row for unknown method: " + name);
    auto& c = t.cell(m, row.at("horizon").get<std::size_t>());
    auto num = [](const nlohmann::json& v) {
      return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    c.mspe = num(row.at("mspe"));
    c.cvr = num(row.at("cvr"));
    c.len = num(row.at("len"));
    c.completed = row.at("completed").get<std::uint64_t>();
  }
  return t;
}

}  // namespace npboot
