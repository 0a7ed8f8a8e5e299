// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// Table exports.
//
// Delimited: one header row, then one row per case in table order. Per
// column the summary fields are flattened into <metric>_<field> columns:
//   scalar     median, mean, std_dev, p80
//   profile    mean, bin0..binN-1            (binned average lateness)
//   frequency  early, 0-1min, ..., 20+min    (average stop counts)
//   affect     median, mean, std_dev, p80    (of per-run totals)
//
// Structured: a JSON document carrying every per-run payload, readable back
// with import_table.

#include <charconv>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "delaysim/error.hpp"
#include "delaysim/table.hpp"

namespace delaysim::io {

using nlohmann::json;

inline constexpr std::string_view kTableFormatName = "delaysim-table";
inline constexpr int kTableFormatVersion = 1;

enum class TableFormat { delimited, structured };

inline TableFormat parse_table_format(std::string_view s) {
  if (s == "delimited") return TableFormat::delimited;
  if (s == "structured") return TableFormat::structured;
  throw LookupError("unknown table format '" + std::string(s) + "'");
}

inline std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline json summary_to_json(stats::Summary const& s) {
  return {{"median", s.median}, {"mean", s.mean}, {"std_dev", s.std_dev}, {"p80", s.p80}};
}

inline stats::Summary summary_from_json(json const& j) {
  return {j.at("median").get<double>(), j.at("mean").get<double>(), j.at("std_dev").get<double>(),
          j.at("p80").get<double>()};
}

inline json cell_to_json(MetricCell const& cell) {
  return std::visit(
      [](auto const& c) -> json {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          return {{"per_run_values", c.per_run_values}, {"summary", summary_to_json(c.summary)}};
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          json runs = json::array();
          for (auto const& run : c.per_run_series) {
            json pts = json::array();
            for (auto const& p : run) pts.push_back({p.position, p.lateness});
            runs.push_back(std::move(pts));
          }
          return {{"per_run_series", std::move(runs)}, {"binned_average", c.binned_average}};
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          json runs = json::array();
          for (auto const& counts : c.per_run_counts) runs.push_back(counts);
          return {{"per_run_counts", std::move(runs)}, {"average_counts", c.average_counts}};
        } else {
          json runs = json::array();
          for (auto const& run : c.per_run_breakdown) {
            json entries = json::array();
            for (auto const& e : run) entries.push_back({e.other, e.seconds});
            runs.push_back(std::move(entries));
          }
          return {{"direction", to_string(c.direction)}, {"per_run_breakdown", std::move(runs)}};
        }
      },
      cell);
}

inline MetricCell cell_from_json(json const& j, MetricFamily family) {
  switch (family) {
    case MetricFamily::scalar: {
      ScalarMetricCell c;
      c.per_run_values = j.at("per_run_values").get<std::vector<double>>();
      c.summary = summary_from_json(j.at("summary"));
      return c;
    }
    case MetricFamily::profile: {
      ProfileMetricCell c;
      for (auto const& run : j.at("per_run_series")) {
        auto& series = c.per_run_series.emplace_back();
        for (auto const& p : run) series.push_back({p.at(0).get<Seconds>(), p.at(1).get<Seconds>()});
      }
      c.binned_average = j.at("binned_average").get<std::vector<double>>();
      return c;
    }
    case MetricFamily::frequency: {
      FrequencyMetricCell c;
      for (auto const& run : j.at("per_run_counts")) c.per_run_counts.push_back(run.get<CategoryCounts>());
      c.average_counts = j.at("average_counts").get<std::array<double, kLatenessCategoryCount>>();
      return c;
    }
    case MetricFamily::affect: {
      AffectMetricCell c;
      c.direction = parse_direction(j.at("direction").get<std::string>());
      for (auto const& run : j.at("per_run_breakdown")) {
        auto& out = c.per_run_breakdown.emplace_back();
        for (auto const& e : run) out.push_back({e.at(0).get<std::string>(), e.at(1).get<Seconds>()});
      }
      return c;
    }
  }
  throw FormatError("unknown metric family");
}

inline json column_to_json(ColumnSpec const& c) {
  auto [lo, hi] = c.axis_range.presented();
  return {{"metric_id", c.metric_id},
          {"family", to_string(c.family)},
          {"axis_range", {c.axis_range.lower, c.axis_range.upper}},
          {"display_range", {lo, hi}},
          {"degenerate", c.axis_range.degenerate()}};
}

inline json case_to_json(CaseInfo const& c) {
  json active = json::array();
  for (auto const& w : c.active) active.push_back({w.start, w.end});
  return {{"id", c.id}, {"categories", c.categories}, {"active", std::move(active)}};
}

inline json table_to_json(MetricTable const& t) {
  json columns = json::array();
  for (auto const& c : t.columns) columns.push_back(column_to_json(c));
  json cases = json::array();
  for (auto const& c : t.cases) cases.push_back(case_to_json(c));
  json cells = json::array();
  for (auto const& row : t.cells) {
    json r = json::array();
    for (auto const& cell : row) r.push_back(cell_to_json(cell));
    cells.push_back(std::move(r));
  }
  return {{"format", kTableFormatName},
          {"format_version", kTableFormatVersion},
          {"case_kind", to_string(t.case_kind)},
          {"n_runs", t.n_runs},
          {"columns", std::move(columns)},
          {"cases", std::move(cases)},
          {"cells", std::move(cells)}};
}

inline MetricTable table_from_json(json const& j) {
  if (j.value("format", "") != kTableFormatName) throw FormatError("not a delaysim table document");
  if (j.value("format_version", -1) != kTableFormatVersion) {
    throw FormatError("unsupported table format_version");
  }
  MetricTable t;
  t.case_kind = parse_case_kind(j.at("case_kind").get<std::string>());
  t.n_runs = j.at("n_runs").get<std::size_t>();
  for (auto const& c : j.at("columns")) {
    auto const& range = c.at("axis_range");
    t.columns.push_back({c.at("metric_id").get<std::string>(),
                         parse_metric_family(c.at("family").get<std::string>()),
                         {range.at(0).get<double>(), range.at(1).get<double>()}});
  }
  for (auto const& c : j.at("cases")) {
    CaseInfo info{c.at("id").get<std::string>(), c.at("categories").get<std::vector<std::string>>(), {}};
    for (auto const& w : c.at("active")) info.active.push_back({w.at(0).get<Seconds>(), w.at(1).get<Seconds>()});
    t.cases.push_back(std::move(info));
  }
  for (auto const& row : j.at("cells")) {
    if (row.size() != t.columns.size()) throw FormatError("table row width does not match columns");
    auto& out = t.cells.emplace_back();
    for (std::size_t k = 0; k < row.size(); ++k) out.push_back(cell_from_json(row[k], t.columns[k].family));
  }
  if (t.cells.size() != t.cases.size()) throw FormatError("table has mismatched case and cell counts");
  return t;
}

inline MetricTable import_table(std::string_view bytes) {
  try {
    return table_from_json(json::parse(bytes));
  } catch (json::exception const& e) {
    throw FormatError(std::string("malformed table document: ") + e.what());
  }
}

namespace detail {

inline void flatten_header(ColumnSpec const& c, MetricCell const* sample, std::string& out) {
  auto add = [&](std::string_view field) { out += "," + c.metric_id + "_" + std::string(field); };
  switch (c.family) {
    case MetricFamily::scalar:
    case MetricFamily::affect:
      for (auto f : {"median", "mean", "std_dev", "p80"}) add(f);
      break;
    case MetricFamily::profile: {
      add("mean");
      std::size_t bins = sample ? std::get<ProfileMetricCell>(*sample).binned_average.size() : 0;
      for (std::size_t b = 0; b < bins; ++b) add("bin" + std::to_string(b));
      break;
    }
    case MetricFamily::frequency:
      for (auto name : kLatenessCategoryNames) add(name);
      break;
  }
}

inline void flatten_cell(MetricCell const& cell, std::string& out) {
  auto add = [&](double v) { out += "," + format_number(v); };
  auto add_summary = [&](stats::Summary const& s) {
    add(s.median);
    add(s.mean);
    add(s.std_dev);
    add(s.p80);
  };
  std::visit(
      [&](auto const& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          add_summary(c.summary);
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          add(stats::mean(per_run_key(c)));
          for (double b : c.binned_average) add(b);
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          for (double a : c.average_counts) add(a);
        } else {
          auto totals = per_run_key(c);
          add_summary(stats::summarize(totals));
        }
      },
      cell);
}

}  // namespace detail

inline std::string export_delimited(MetricTable const& t) {
  std::string out = "case_id";
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    detail::flatten_header(t.columns[k], t.cells.empty() ? nullptr : &t.cells.front()[k], out);
  }
  out += "\n";
  for (std::size_t r = 0; r < t.cases.size(); ++r) {
    out += t.cases[r].id;
    for (auto const& cell : t.cells[r]) detail::flatten_cell(cell, out);
    out += "\n";
  }
  return out;
}

inline std::string export_table(MetricTable const& t, TableFormat format) {
  if (format == TableFormat::delimited) return export_delimited(t);
  return table_to_json(t).dump() + "\n";
}

}  // namespace delaysim::io
