// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/metrics.hpp"
#include "delaysim/station.hpp"
#include "delaysim/stats.hpp"

namespace delaysim {

enum class CaseKind { train, station };
enum class MetricFamily { scalar, profile, frequency, affect };
enum class Statistic { median, mean, std_dev, p80 };
enum class SortOrder { ascending, descending };

inline constexpr std::string_view to_string(CaseKind k) {
  return k == CaseKind::train ? "train" : "station";
}

inline constexpr std::string_view to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::scalar: return "scalar";
    case MetricFamily::profile: return "profile";
    case MetricFamily::frequency: return "frequency";
    case MetricFamily::affect: return "affect";
  }
  return "";
}

inline constexpr std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::median: return "median";
    case Statistic::mean: return "mean";
    case Statistic::std_dev: return "std_dev";
    case Statistic::p80: return "p80";
  }
  return "";
}

inline CaseKind parse_case_kind(std::string_view s) {
  if (s == "train") return CaseKind::train;
  if (s == "station") return CaseKind::station;
  throw LookupError("unknown case kind '" + std::string(s) + "'");
}

inline MetricFamily parse_metric_family(std::string_view s) {
  for (auto f : {MetricFamily::scalar, MetricFamily::profile, MetricFamily::frequency,
                 MetricFamily::affect}) {
    if (to_string(f) == s) return f;
  }
  throw LookupError("unknown metric family '" + std::string(s) + "'");
}

inline Statistic parse_statistic(std::string_view s) {
  for (auto st : {Statistic::median, Statistic::mean, Statistic::std_dev, Statistic::p80}) {
    if (to_string(st) == s) return st;
  }
  throw LookupError("unknown statistic '" + std::string(s) + "'");
}

inline SortOrder parse_sort_order(std::string_view s) {
  if (s == "asc" || s == "ascending") return SortOrder::ascending;
  if (s == "desc" || s == "descending") return SortOrder::descending;
  throw LookupError("unknown sort order '" + std::string(s) + "'");
}

inline AffectDirection parse_direction(std::string_view s) {
  if (s == "causes_delay_to") return AffectDirection::causes_delay_to;
  if (s == "suffers_delay_from") return AffectDirection::suffers_delay_from;
  throw LookupError("unknown affect direction '" + std::string(s) + "'");
}

struct MetricDef {
  std::string_view id;
  MetricFamily family;
  ScalarKind kind = ScalarKind::avg_stop_lateness;
  bool passenger_weighted = false;
  AffectDirection direction = AffectDirection::suffers_delay_from;
  bool station_case = false;  // also defined for station cases
};

inline constexpr std::array<MetricDef, 11> kMetricCatalog = {{
    {"reactionary_caused", MetricFamily::scalar, ScalarKind::reactionary_caused, false, {}, true},
    {"reactionary_suffered", MetricFamily::scalar, ScalarKind::reactionary_suffered, false, {}, true},
    {"primary_delay", MetricFamily::scalar, ScalarKind::primary_delay, false, {}, true},
    {"destination_lateness", MetricFamily::scalar, ScalarKind::destination_lateness, false, {}, false},
    {"avg_stop_lateness", MetricFamily::scalar, ScalarKind::avg_stop_lateness, false, {}, true},
    {"pw_stop_lateness", MetricFamily::scalar, ScalarKind::avg_stop_lateness, true, {}, true},
    {"pw_destination_lateness", MetricFamily::scalar, ScalarKind::destination_lateness, true, {}, false},
    {"lateness_profile", MetricFamily::profile, {}, false, {}, false},
    {"lateness_frequency", MetricFamily::frequency, {}, false, {}, true},
    {"delay_caused_to", MetricFamily::affect, {}, false, AffectDirection::causes_delay_to, false},
    {"delay_suffered_from", MetricFamily::affect, {}, false, AffectDirection::suffers_delay_from, false},
}};

inline MetricDef const& find_metric(std::string_view id) {
  for (auto const& m : kMetricCatalog) {
    if (m.id == id) return m;
  }
  throw LookupError("unknown metric '" + std::string(id) + "'");
}

// Column scale. Always anchored at zero; a zero-width range is degenerate and
// presented as [0, 1].
struct AxisRange {
  double lower = 0;
  double upper = 0;

  bool degenerate() const { return !(upper > lower); }
  std::pair<double, double> presented() const {
    return degenerate() ? std::pair{lower, lower + 1} : std::pair{lower, upper};
  }

  bool operator==(AxisRange const&) const = default;
};

// Half-open [start, end).
struct TimeWindow {
  Seconds start = 0;
  Seconds end = 0;

  bool overlaps(TimeWindow const& o) const { return start < o.end && end > o.start; }
  bool operator==(TimeWindow const&) const = default;
};

struct CaseInfo {
  std::string id;
  std::vector<std::string> categories;
  std::vector<TimeWindow> active;

  bool operator==(CaseInfo const&) const = default;
};

using MetricCell =
    std::variant<ScalarMetricCell, ProfileMetricCell, FrequencyMetricCell, AffectMetricCell>;

struct ColumnSpec {
  std::string metric_id;
  MetricFamily family = MetricFamily::scalar;
  AxisRange axis_range;

  bool operator==(ColumnSpec const&) const = default;
};

// Case-by-variable table. Rows (cases and cells) are stored in display
// order; cells[row][column].
struct MetricTable {
  CaseKind case_kind = CaseKind::train;
  std::size_t n_runs = 0;
  std::vector<CaseInfo> cases;
  std::vector<ColumnSpec> columns;
  std::vector<std::vector<MetricCell>> cells;

  bool operator==(MetricTable const&) const = default;

  std::vector<std::string> case_ids() const {
    std::vector<std::string> out;
    out.reserve(cases.size());
    for (auto const& c : cases) out.push_back(c.id);
    return out;
  }

  std::size_t column_index(std::string_view metric_id) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].metric_id == metric_id) return i;
    }
    throw LookupError("table has no column '" + std::string(metric_id) + "'");
  }

  std::size_t row_index(std::string_view case_id) const {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (cases[i].id == case_id) return i;
    }
    throw LookupError("table has no case '" + std::string(case_id) + "'");
  }
};

inline constexpr std::size_t kDefaultProfileBins = 10;
inline constexpr double kDefaultAxisPercentile = 95;

struct TableOptions {
  std::size_t profile_bins = kDefaultProfileBins;
  double axis_percentile = kDefaultAxisPercentile;
};

// One value per run that stands for the cell when ranking: the scalar itself,
// mean stop lateness for profiles, midpoint-weighted late-stop count for
// frequencies, and total seconds for affect cells.
inline std::vector<double> per_run_key(MetricCell const& cell) {
  return std::visit(
      [](auto const& c) -> std::vector<double> {
        using C = std::decay_t<decltype(c)>;
        std::vector<double> out;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          out = c.per_run_values;
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          for (auto const& run : c.per_run_series) {
            double s = 0;
            for (auto const& p : run) s += static_cast<double>(p.lateness);
            out.push_back(run.empty() ? 0.0 : s / static_cast<double>(run.size()));
          }
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          for (auto const& run : c.per_run_counts) {
            double s = 0;
            for (std::size_t k = 0; k < kLatenessCategoryCount; ++k) {
              s += kLatenessCategoryMidpoints[k] * run[k];
            }
            out.push_back(s);
          }
        } else {
          for (auto t : c.per_run_totals()) out.push_back(static_cast<double>(t));
        }
        return out;
      },
      cell);
}

inline double apply_statistic(std::span<double const> values, Statistic s) {
  switch (s) {
    case Statistic::median: return stats::median(values);
    case Statistic::mean: return stats::mean(values);
    case Statistic::std_dev: return stats::std_dev(values);
    case Statistic::p80: return stats::nearest_rank(values, 80);
  }
  return 0;
}

inline double case_statistic(MetricCell const& cell, Statistic s) {
  auto v = per_run_key(cell);
  return apply_statistic(v, s);
}

namespace detail {

inline MetricCell build_train_cell(EnsembleIndex const& idx, MetricDef const& m,
                                   TrainId const& id, TableOptions const& opts) {
  switch (m.family) {
    case MetricFamily::scalar:
      return m.passenger_weighted ? passenger_weight(idx, m.kind, id) : scalar_metric(idx, m.kind, id);
    case MetricFamily::profile:
      return lateness_profile(idx, id, opts.profile_bins);
    case MetricFamily::frequency:
      return lateness_frequencies(idx, id);
    case MetricFamily::affect:
      return affecting_trains(idx, id, m.direction);
  }
  throw LookupError("unsupported metric family");
}

inline MetricCell build_station_cell(StationView const& v, MetricDef const& m, std::size_t st) {
  auto as_double = [](std::vector<Seconds> const& xs) {
    return std::vector<double>(xs.begin(), xs.end());
  };
  if (m.family == MetricFamily::frequency) return make_frequency_cell(v.frequency[st]);
  if (m.passenger_weighted) {
    if (!v.has_passenger_loads()) {
      throw MetricError("metric " + std::string(m.id) + " needs passenger_load at every stop");
    }
    return make_scalar_cell(as_double(v.weighted_lateness[st]));
  }
  switch (m.kind) {
    case ScalarKind::reactionary_caused: return make_scalar_cell(as_double(v.caused[st]));
    case ScalarKind::reactionary_suffered: return make_scalar_cell(as_double(v.suffered[st]));
    case ScalarKind::primary_delay: return make_scalar_cell(as_double(v.primary[st]));
    case ScalarKind::avg_stop_lateness: return make_scalar_cell(v.avg_lateness[st]);
    case ScalarKind::destination_lateness: break;
  }
  throw MetricError("metric " + std::string(m.id) + " is not defined for station cases");
}

// Values the default column scale is computed over.
inline void collect_axis_values(MetricCell const& cell, std::vector<double>& out) {
  std::visit(
      [&](auto const& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          out.insert(out.end(), c.per_run_values.begin(), c.per_run_values.end());
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          for (auto const& run : c.per_run_series) {
            for (auto const& p : run) out.push_back(static_cast<double>(p.lateness));
          }
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          for (auto const& run : c.per_run_counts) {
            out.push_back(static_cast<double>(std::accumulate(run.begin(), run.end(), 0U)));
          }
        } else {
          for (auto t : c.per_run_totals()) out.push_back(static_cast<double>(t));
        }
      },
      cell);
}

}  // namespace detail

// [0, nearest-rank percentile of every per-run value in the column]; per-run
// totals for frequency and affect columns. Negative percentiles clamp to 0.
inline AxisRange axis_range(MetricTable const& table, std::string_view column_id,
                            double percentile = kDefaultAxisPercentile) {
  auto col = table.column_index(column_id);
  std::vector<double> values;
  for (auto const& row : table.cells) detail::collect_axis_values(row[col], values);
  double upper = values.empty() ? 0.0 : stats::nearest_rank(values, percentile);
  return {0.0, std::max(0.0, upper)};
}

inline void set_axis_range(MetricTable& table, std::string_view column_id, AxisRange range) {
  table.columns[table.column_index(column_id)].axis_range = range;
}

// Rows of a train-case table follow timetable order; station cases are sorted
// by station id.
inline MetricTable build_metric_table(Ensemble const& e, CaseKind kind,
                                      std::vector<std::string> const& metric_ids,
                                      TableOptions const& opts = {}) {
  if (metric_ids.empty()) throw LookupError("at least one metric is required");
  std::vector<MetricDef const*> defs;
  for (auto const& id : metric_ids) {
    auto const& m = find_metric(id);
    if (kind == CaseKind::station && !m.station_case) {
      throw MetricError("metric " + id + " is only defined for train cases");
    }
    defs.push_back(&m);
  }

  MetricTable table;
  table.case_kind = kind;
  table.n_runs = e.n_runs();
  for (auto const* m : defs) table.columns.push_back({std::string(m->id), m->family, {}});

  auto const& tt = *e.timetable;
  if (kind == CaseKind::train) {
    EnsembleIndex idx(e);
    table.cases.reserve(tt.trains.size());
    table.cells.reserve(tt.trains.size());
    for (auto const& t : tt.trains) {
      table.cases.push_back({t.train_id, {t.category}, {{t.first_departure(), t.last_arrival()}}});
      auto& row = table.cells.emplace_back();
      row.reserve(defs.size());
      for (auto const* m : defs) row.push_back(detail::build_train_cell(idx, *m, t.train_id, opts));
    }
  } else {
    auto view = aggregate_by_station(e);
    for (std::size_t st = 0; st < view.case_ids.size(); ++st) {
      CaseInfo info{view.case_ids[st],
                    {view.categories[st].begin(), view.categories[st].end()},
                    {}};
      for (auto const& c : view.calls[st]) {
        auto const& stop = tt.trains[c.train].stops[c.stop];
        info.active.push_back({stop.arrival(), std::max(stop.sched_departure, stop.arrival() + 1)});
      }
      table.cases.push_back(std::move(info));
      auto& row = table.cells.emplace_back();
      for (auto const* m : defs) row.push_back(detail::build_station_cell(view, *m, st));
    }
  }
  for (auto& col : table.columns) col.axis_range = axis_range(table, col.metric_id, opts.axis_percentile);
  return table;
}

// Stable ranking by the statistic of each case's per-run key. Ties are
// broken by ascending case id in both directions.
inline std::vector<std::string> sort_cases(MetricTable const& table, std::string_view column_id,
                                           Statistic statistic, SortOrder order) {
  auto col = table.column_index(column_id);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(table.cases.size());
  for (std::size_t r = 0; r < table.cases.size(); ++r) {
    keyed.emplace_back(case_statistic(table.cells[r][col], statistic), r);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [&](auto const& a, auto const& b) {
    if (a.first != b.first) {
      return order == SortOrder::descending ? a.first > b.first : a.first < b.first;
    }
    return table.cases[a.second].id < table.cases[b.second].id;
  });
  std::vector<std::string> out;
  out.reserve(keyed.size());
  for (auto const& [k, r] : keyed) out.push_back(table.cases[r].id);
  return out;
}

// Reorders rows to match `case_order`, which must be a permutation of the
// table's case ids.
inline MetricTable apply_order(MetricTable table, std::vector<std::string> const& case_order) {
  if (case_order.size() != table.cases.size()) {
    throw LookupError("case order is not a permutation of the table's cases");
  }
  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t r = 0; r < table.cases.size(); ++r) at.emplace(table.cases[r].id, r);
  MetricTable out;
  out.case_kind = table.case_kind;
  out.n_runs = table.n_runs;
  out.columns = std::move(table.columns);
  out.cases.reserve(case_order.size());
  out.cells.reserve(case_order.size());
  for (auto const& id : case_order) {
    auto it = at.find(id);
    if (it == at.end()) throw LookupError("case order names unknown case " + id);
    out.cases.push_back(std::move(table.cases[it->second]));
    out.cells.push_back(std::move(table.cells[it->second]));
    at.erase(it);
  }
  return out;
}

inline MetricTable sorted(MetricTable table, std::string_view column_id, Statistic statistic,
                          SortOrder order) {
  auto perm = sort_cases(table, column_id, statistic, order);
  return apply_order(std::move(table), perm);
}

// With rows ranked descending by the statistic, returns for each threshold
// k * 10% (k = 1..9) of the grand total the first row whose cumulative sum
// reaches it; a line is drawn below that row. Duplicates are merged.
// Negative values count as zero.
inline std::vector<std::size_t> decile_boundaries(std::span<double const> descending_values) {
  std::vector<std::size_t> out;
  double total = 0;
  for (double v : descending_values) total += std::max(0.0, v);
  if (!(total > 0)) return out;
  double cum = 0;
  int k = 1;
  for (std::size_t r = 0; r < descending_values.size() && k <= 9; ++r) {
    cum += std::max(0.0, descending_values[r]);
    bool hit = false;
    while (k <= 9 && cum * 10 >= total * k) {
      hit = true;
      ++k;
    }
    if (hit) out.push_back(r);
  }
  return out;
}

inline std::vector<std::size_t> decile_boundaries(MetricTable const& table,
                                                  std::string_view column_id,
                                                  Statistic statistic) {
  auto col = table.column_index(column_id);
  auto order = sort_cases(table, column_id, statistic, SortOrder::descending);
  std::vector<double> values;
  values.reserve(order.size());
  for (auto const& id : order) {
    values.push_back(case_statistic(table.cells[table.row_index(id)][col], statistic));
  }
  return decile_boundaries(values);
}

struct CaseFilter {
  std::optional<std::string> id_pattern;        // substring
  std::optional<std::set<std::string>> categories;
  std::optional<TimeWindow> time_window;

  bool empty() const { return !id_pattern && !categories && !time_window; }
};

inline bool matches(CaseInfo const& c, CaseFilter const& f) {
  if (f.id_pattern && c.id.find(*f.id_pattern) == std::string::npos) return false;
  if (f.categories) {
    bool any = std::any_of(c.categories.begin(), c.categories.end(),
                           [&](auto const& cat) { return f.categories->count(cat) > 0; });
    if (!any) return false;
  }
  if (f.time_window) {
    bool any = std::any_of(c.active.begin(), c.active.end(),
                           [&](auto const& w) { return w.overlaps(*f.time_window); });
    if (!any) return false;
  }
  return true;
}

// Keeps matching rows in their current order; columns (and their scales) are
// carried over untouched.
inline MetricTable filter_cases(MetricTable const& table, CaseFilter const& filter) {
  MetricTable out;
  out.case_kind = table.case_kind;
  out.n_runs = table.n_runs;
  out.columns = table.columns;
  for (std::size_t r = 0; r < table.cases.size(); ++r) {
    if (!matches(table.cases[r], filter)) continue;
    out.cases.push_back(table.cases[r]);
    out.cells.push_back(table.cells[r]);
  }
  return out;
}

struct SamplingInfo {
  std::size_t row_stride = 1;
  std::size_t run_stride = 1;
  std::vector<std::size_t> rows;  // indices into the parent table
  std::vector<std::size_t> runs;  // run indices kept

  bool sampled() const { return row_stride > 1 || run_stride > 1; }
  bool operator==(SamplingInfo const&) const = default;
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

inline SamplingInfo sampling_plan(std::size_t n_rows, std::size_t n_runs, std::size_t max_rows,
                                  std::size_t max_runs) {
  if (max_rows < 1 || max_runs < 1) throw std::invalid_argument("sample limits must be at least 1");
  SamplingInfo s;
  s.row_stride = n_rows > max_rows ? ceil_div(n_rows, max_rows) : 1;
  s.run_stride = n_runs > max_runs ? ceil_div(n_runs, max_runs) : 1;
  for (std::size_t r = 0; r < n_rows; r += s.row_stride) s.rows.push_back(r);
  for (std::size_t k = 0; k < n_runs; k += s.run_stride) s.runs.push_back(k);
  return s;
}

namespace detail {

template <typename T>
std::vector<T> pick(std::vector<T> const& v, std::vector<std::size_t> const& at) {
  std::vector<T> out;
  out.reserve(at.size());
  for (auto k : at) out.push_back(v[k]);
  return out;
}

// Keeps only the sampled runs' detail; summaries stay those of the full
// ensemble.
inline MetricCell restrict_runs(MetricCell const& cell, std::vector<std::size_t> const& runs) {
  return std::visit(
      [&](auto const& c) -> MetricCell {
        using C = std::decay_t<decltype(c)>;
        C out = c;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          out.per_run_values = pick(c.per_run_values, runs);
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          out.per_run_series = pick(c.per_run_series, runs);
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          out.per_run_counts = pick(c.per_run_counts, runs);
        } else {
          out.per_run_breakdown = pick(c.per_run_breakdown, runs);
        }
        return out;
      },
      cell);
}

}  // namespace detail

struct SampledTable {
  MetricTable table;
  SamplingInfo sampling;
};

// Every ceil(rows / max_rows)-th row of the current order and a uniform run
// stride, so each remaining row and run gets at least a pixel.
inline SampledTable sample_for_render(MetricTable const& table, std::size_t max_rows,
                                      std::size_t max_runs) {
  SampledTable out;
  out.sampling = sampling_plan(table.cases.size(), table.n_runs, max_rows, max_runs);
  out.table.case_kind = table.case_kind;
  out.table.n_runs = out.sampling.runs.size();
  out.table.columns = table.columns;
  for (auto r : out.sampling.rows) {
    out.table.cases.push_back(table.cases[r]);
    auto& row = out.table.cells.emplace_back();
    for (auto const& cell : table.cells[r]) {
      row.push_back(out.sampling.run_stride == 1 ? cell
                                                 : detail::restrict_runs(cell, out.sampling.runs));
    }
  }
  return out;
}

}  // namespace delaysim
