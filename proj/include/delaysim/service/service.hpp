// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// Request handling behind the HTTP API, independent of the transport.
//
//   POST /timetables                                  body: timetable text
//   POST /simulations                                 body: SimulationRequest JSON
//   POST /tables                                      body: TableRequest JSON
//   GET  /ensembles/{id}/cases/{case}/metrics/{metric}[?case_kind=train|station]
//   GET  /ensembles/{id}/histogram[?bin_minutes=30]
//   GET  /ensembles/{id}/cases/{case}/affecting?direction=suffers_delay_from|causes_delay_to
//
// Status codes: 400 malformed request, 404 unknown id, 413 simulation above
// the synchronous size cap, 422 request that parses but is semantically
// invalid.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/histogram.hpp"
#include "delaysim/io/config_file.hpp"
#include "delaysim/io/table_export.hpp"
#include "delaysim/io/timetable_file.hpp"
#include "delaysim/table.hpp"

namespace delaysim::service {

using nlohmann::json;

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using Query = std::map<std::string, std::string>;

// runs x station stops allowed per synchronous simulation request.
inline constexpr std::uint64_t kDefaultEventCap = 10'000'000;

struct ServiceOptions {
  std::uint64_t event_cap = kDefaultEventCap;
  unsigned threads = 0;
};

struct TableRequest {
  std::string ensemble_id;
  CaseKind case_kind = CaseKind::train;
  std::vector<std::string> metric_ids;  // empty = every metric the data supports
  struct Sort {
    std::string column;
    Statistic statistic = Statistic::median;
    SortOrder order = SortOrder::descending;
  };
  std::optional<Sort> sort;
  CaseFilter filter;
  std::map<std::string, AxisRange> scale_overrides;
  std::optional<std::pair<std::size_t, std::size_t>> sample;  // (max_rows, max_runs)
  std::size_t profile_bins = kDefaultProfileBins;
};

namespace detail {

struct HttpError {
  int status;
  std::string message;
};

[[noreturn]] inline void fail(int status, std::string message) {
  throw HttpError{status, std::move(message)};
}

inline Response json_response(int status, json const& body) {
  return {status, body.dump() + "\n", "application/json"};
}

inline Response error_response(int status, std::string const& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

inline Seconds parse_window_bound(json const& v) {
  if (v.is_number_integer()) return v.get<Seconds>();
  if (v.is_string()) {
    auto t = parse_clock(v.get<std::string>());
    if (t) return *t;
  }
  fail(400, "time_window bounds must be seconds or HH:MM:SS");
}

inline std::vector<std::string> default_metrics(CaseKind kind, Timetable const& tt) {
  std::vector<std::string> out;
  bool loads = tt.has_passenger_loads();
  for (auto const& m : kMetricCatalog) {
    if (kind == CaseKind::station && !m.station_case) continue;
    if (m.passenger_weighted && !loads) continue;
    out.emplace_back(m.id);
  }
  return out;
}

// Low-detail view of a cell: what the zoomed-out mini-chart draws.
inline json cell_summary(MetricCell const& cell) {
  return std::visit(
      [&](auto const& c) -> json {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ScalarMetricCell>) {
          return io::summary_to_json(c.summary);
        } else if constexpr (std::is_same_v<C, ProfileMetricCell>) {
          return {{"binned_average", c.binned_average}, {"mean", stats::mean(per_run_key(c))}};
        } else if constexpr (std::is_same_v<C, FrequencyMetricCell>) {
          return {{"average_counts", c.average_counts}};
        } else {
          // Median contribution of each other train, absent runs counting 0.
          std::map<TrainId, std::vector<double>> per_other;
          auto n = c.per_run_breakdown.size();
          for (std::size_t r = 0; r < n; ++r) {
            for (auto const& e : c.per_run_breakdown[r]) {
              auto& v = per_other[e.other];
              v.resize(n, 0);
              v[r] = static_cast<double>(e.seconds);
            }
          }
          std::vector<std::pair<TrainId, double>> medians;
          for (auto const& [id, v] : per_other) {
            double m = stats::median(v);
            if (m > 0) medians.emplace_back(id, m);
          }
          std::stable_sort(medians.begin(), medians.end(),
                           [](auto const& a, auto const& b) { return a.second > b.second; });
          json parts = json::array();
          for (auto const& [id, m] : medians) parts.push_back({id, m});
          auto totals = per_run_key(c);
          return {{"direction", to_string(c.direction)},
                  {"median_contributions", std::move(parts)},
                  {"total", io::summary_to_json(stats::summarize(totals))}};
        }
      },
      cell);
}

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace detail

class Service {
public:
  explicit Service(ServiceOptions opts = {}) : opts_(opts) {}

  Response handle(std::string_view method, std::string_view path, Query const& query,
                  std::string_view body) {
    try {
      auto parts = detail::split_path(path);
      if (method == "POST" && parts.size() == 1) {
        if (parts[0] == "timetables") return post_timetable(body);
        if (parts[0] == "simulations") return post_simulation(body);
        if (parts[0] == "tables") return post_table(body);
      }
      if (method == "GET" && parts.size() >= 3 && parts[0] == "ensembles") {
        if (parts.size() == 3 && parts[2] == "histogram") {
          auto it = query.find("bin_minutes");
          return get_histogram(parts[1], it == query.end() ? "30" : it->second);
        }
        if (parts.size() == 6 && parts[2] == "cases" && parts[4] == "metrics") {
          auto it = query.find("case_kind");
          return get_cell(parts[1], parts[3], parts[5], it == query.end() ? "train" : it->second);
        }
        if (parts.size() == 5 && parts[2] == "cases" && parts[4] == "affecting") {
          auto it = query.find("direction");
          return get_affecting(parts[1], parts[3],
                               it == query.end() ? "suffers_delay_from" : it->second);
        }
      }
      if (method == "GET" && parts.size() == 1 && parts[0] == "health") {
        return detail::json_response(200, {{"status", "ok"}});
      }
      return detail::error_response(404, "no route for " + std::string(method) + " " +
                                             std::string(path));
    } catch (detail::HttpError const& e) {
      return detail::error_response(e.status, e.message);
    } catch (json::exception const& e) {
      return detail::error_response(400, std::string("malformed request: ") + e.what());
    } catch (ParseError const& e) {
      return detail::error_response(400, e.what());
    } catch (FormatError const& e) {
      return detail::error_response(400, e.what());
    } catch (Error const& e) {
      return detail::error_response(422, e.what());
    } catch (std::invalid_argument const& e) {
      return detail::error_response(400, e.what());
    }
  }

  Response post_timetable(std::string_view body) {
    Timetable tt;
    try {
      tt = io::parse_timetable(body);
    } catch (ParseError const& e) {
      int status = e.invalid() ? 422 : 400;
      return detail::json_response(
          status, {{"error", e.what()},
                {"status", status},
                {"diagnostics", {{{"line", e.line()}, {"column", e.column()}, {"message", e.what()}}}}});
    }
    auto id = store_timetable(std::make_shared<Timetable const>(std::move(tt)));
    return detail::json_response(201, {{"timetable_id", id}});
  }

  Response post_simulation(std::string_view body) {
    auto req = json::parse(body);
    if (!req.is_object()) detail::fail(400, "simulation request must be a JSON object");
    auto tt = timetable(req.at("timetable_id").get<std::string>());
    auto n_runs = req.at("n_runs").get<std::int64_t>();
    if (n_runs < 1) detail::fail(422, "n_runs must be at least 1");
    auto seed = req.value("seed", std::uint64_t{0});
    auto cfg = io::delay_config_from_json(req.at("config"));
    auto params = req.contains("params") ? io::sim_params_from_json(req.at("params")) : SimParams{};
    auto events = static_cast<std::uint64_t>(n_runs) * tt->stop_count();
    if (events > opts_.event_cap) {
      detail::fail(413, "simulation of " + std::to_string(events) + " stop events exceeds the cap of " +
                            std::to_string(opts_.event_cap) + "; run it with the delaysim CLI instead");
    }
    std::string id;
    {
      std::unique_lock lock(mutex_);
      id = "ens-" + std::to_string(++ensemble_seq_);
    }
    auto e = std::make_shared<Ensemble const>(run_ensemble(
        tt, std::move(cfg), params, static_cast<std::size_t>(n_runs), seed, {id, opts_.threads}));
    {
      std::unique_lock lock(mutex_);
      ensembles_.emplace(id, std::move(e));
    }
    return detail::json_response(201, {{"ensemble_id", id}});
  }

  static TableRequest parse_table_request(json const& j) {
    if (!j.is_object()) detail::fail(400, "table request must be a JSON object");
    TableRequest r;
    r.ensemble_id = j.at("ensemble_id").get<std::string>();
    if (j.contains("case_kind")) r.case_kind = parse_case_kind(j.at("case_kind").get<std::string>());
    if (j.contains("metric_ids")) r.metric_ids = j.at("metric_ids").get<std::vector<std::string>>();
    if (j.contains("sort") && !j.at("sort").is_null()) {
      auto const& s = j.at("sort");
      TableRequest::Sort sort;
      sort.column = s.at("column").get<std::string>();
      if (s.contains("statistic")) sort.statistic = parse_statistic(s.at("statistic").get<std::string>());
      if (s.contains("order")) sort.order = parse_sort_order(s.at("order").get<std::string>());
      r.sort = sort;
    }
    if (j.contains("filter") && !j.at("filter").is_null()) {
      auto const& f = j.at("filter");
      if (f.contains("id_pattern") && !f.at("id_pattern").is_null()) {
        r.filter.id_pattern = f.at("id_pattern").get<std::string>();
      }
      if (f.contains("categories") && !f.at("categories").is_null()) {
        auto cats = f.at("categories").get<std::vector<std::string>>();
        r.filter.categories = std::set<std::string>(cats.begin(), cats.end());
      }
      if (f.contains("time_window") && !f.at("time_window").is_null()) {
        auto const& w = f.at("time_window");
        if (!w.is_array() || w.size() != 2) detail::fail(400, "time_window must be [start, end]");
        r.filter.time_window = TimeWindow{detail::parse_window_bound(w[0]), detail::parse_window_bound(w[1])};
      }
    }
    if (j.contains("scale_overrides")) {
      for (auto const& [col, range] : j.at("scale_overrides").items()) {
        r.scale_overrides[col] = {range.at(0).get<double>(), range.at(1).get<double>()};
      }
    }
    if (j.contains("sample") && !j.at("sample").is_null()) {
      auto const& s = j.at("sample");
      auto rows = s.at("max_rows").get<std::int64_t>();
      auto runs = s.at("max_runs").get<std::int64_t>();
      if (rows < 1 || runs < 1) detail::fail(422, "sample limits must be at least 1");
      r.sample = {static_cast<std::size_t>(rows), static_cast<std::size_t>(runs)};
    }
    if (j.contains("profile_bins")) {
      auto bins = j.at("profile_bins").get<std::int64_t>();
      if (bins < 1) detail::fail(422, "profile_bins must be at least 1");
      r.profile_bins = static_cast<std::size_t>(bins);
    }
    return r;
  }

  // Builds the table a TableRequest describes: scale overrides, then sort,
  // then filter (which keeps the sort and the scales).
  static json table_payload(Ensemble const& e, TableRequest const& req) {
    auto metrics = req.metric_ids.empty() ? detail::default_metrics(req.case_kind, *e.timetable)
                                          : req.metric_ids;
    if (req.sort && std::find(metrics.begin(), metrics.end(), req.sort->column) == metrics.end()) {
      throw LookupError("sort column '" + req.sort->column + "' is not among the requested metrics");
    }
    for (auto const& [col, range] : req.scale_overrides) {
      if (std::find(metrics.begin(), metrics.end(), col) == metrics.end()) {
        throw LookupError("scale override for unknown column '" + col + "'");
      }
    }
    TableOptions opts;
    opts.profile_bins = req.profile_bins;
    auto table = build_metric_table(e, req.case_kind, metrics, opts);
    for (auto const& [col, range] : req.scale_overrides) set_axis_range(table, col, range);
    if (req.sort) table = sorted(std::move(table), req.sort->column, req.sort->statistic, req.sort->order);
    if (!req.filter.empty()) table = filter_cases(table, req.filter);

    json deciles = json::array();
    if (req.sort && req.sort->order == SortOrder::descending) {
      for (auto r : decile_boundaries(table, req.sort->column, req.sort->statistic)) deciles.push_back(r);
    }

    json columns = json::array();
    for (auto const& c : table.columns) columns.push_back(io::column_to_json(c));
    json rows = json::array();
    for (std::size_t r = 0; r < table.cases.size(); ++r) {
      json cells = json::array();
      for (auto const& cell : table.cells[r]) cells.push_back(detail::cell_summary(cell));
      rows.push_back({{"id", table.cases[r].id},
                      {"categories", table.cases[r].categories},
                      {"cells", std::move(cells)}});
    }
    json payload = {{"ensemble_id", e.ensemble_id},
                    {"case_kind", to_string(table.case_kind)},
                    {"n_runs", table.n_runs},
                    {"case_order", table.case_ids()},
                    {"columns", std::move(columns)},
                    {"deciles", std::move(deciles)},
                    {"rows", std::move(rows)}};
    if (req.sort) {
      payload["sort"] = {{"column", req.sort->column},
                         {"statistic", to_string(req.sort->statistic)},
                         {"order", req.sort->order == SortOrder::descending ? "desc" : "asc"}};
    }
    if (req.sample) {
      auto sampled = sample_for_render(table, req.sample->first, req.sample->second);
      payload["sampling"] = {{"row_stride", sampled.sampling.row_stride},
                             {"run_stride", sampled.sampling.run_stride},
                             {"rows", sampled.sampling.rows},
                             {"runs", sampled.sampling.runs}};
      json detail_rows = json::array();
      for (auto const& row : sampled.table.cells) {
        json cells = json::array();
        for (auto const& cell : row) cells.push_back(io::cell_to_json(cell));
        detail_rows.push_back(std::move(cells));
      }
      payload["detail"] = std::move(detail_rows);
    }
    return payload;
  }

  Response post_table(std::string_view body) {
    auto req = parse_table_request(json::parse(body));
    auto e = ensemble(req.ensemble_id);
    return detail::json_response(200, table_payload(*e, req));
  }

  Response get_cell(std::string const& ensemble_id, std::string const& case_id,
                    std::string const& metric_id, std::string const& case_kind) {
    auto e = ensemble(ensemble_id);
    auto kind = parse_case_kind(case_kind);
    auto const& def = find_metric(metric_id);
    auto table = build_metric_table(*e, kind, {metric_id});
    std::size_t row = 0;
    try {
      row = table.row_index(case_id);
    } catch (LookupError const&) {
      detail::fail(404, "unknown " + std::string(to_string(kind)) + " case " + case_id);
    }
    return detail::json_response(200, {{"ensemble_id", e->ensemble_id},
                                       {"case_kind", to_string(kind)},
                                       {"case_id", case_id},
                                       {"metric_id", metric_id},
                                       {"family", to_string(def.family)},
                                       {"column", io::column_to_json(table.columns.front())},
                                       {"cell", io::cell_to_json(table.cells[row].front())}});
  }

  Response get_histogram(std::string const& ensemble_id, std::string const& bin_minutes) {
    auto e = ensemble(ensemble_id);
    int bins = 0;
    auto [p, ec] = std::from_chars(bin_minutes.data(), bin_minutes.data() + bin_minutes.size(), bins);
    if (ec != std::errc{} || p != bin_minutes.data() + bin_minutes.size()) {
      detail::fail(400, "bin_minutes must be an integer");
    }
    if (bins <= 0 || 1440 % bins != 0) detail::fail(422, "bin_minutes must divide 1440");
    auto h = temporal_histogram(*e->timetable, bins);
    json out_bins = json::array();
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      json counts = json::object();
      for (std::size_t c = 0; c < h.categories.size(); ++c) counts[h.categories[c]] = h.counts[b][c];
      out_bins.push_back({{"start_seconds", h.bin_start(b)},
                          {"start", format_clock(h.bin_start(b))},
                          {"counts", std::move(counts)}});
    }
    return detail::json_response(200, {{"ensemble_id", e->ensemble_id},
                                       {"bin_minutes", h.bin_minutes},
                                       {"categories", h.categories},
                                       {"bins", std::move(out_bins)}});
  }

  // Every train involved with `case_id` in the given direction, across runs.
  Response get_affecting(std::string const& ensemble_id, std::string const& case_id,
                         std::string const& direction) {
    auto e = ensemble(ensemble_id);
    auto dir = parse_direction(direction);
    EnsembleIndex idx(*e);
    try {
      idx.train(case_id);
    } catch (LookupError const&) {
      detail::fail(404, "unknown train " + case_id);
    }
    auto cell = affecting_trains(idx, case_id, dir);
    json involved = json::object();
    for (std::size_t r = 0; r < cell.per_run_breakdown.size(); ++r) {
      for (auto const& entry : cell.per_run_breakdown[r]) {
        involved[entry.other].push_back({{"run", r}, {"seconds", entry.seconds}});
      }
    }
    json highlight = json::array({case_id});
    for (auto const& [id, runs] : involved.items()) {
      if (id != case_id) highlight.push_back(id);
    }
    return detail::json_response(200, {{"ensemble_id", e->ensemble_id},
                                       {"case_id", case_id},
                                       {"direction", to_string(dir)},
                                       {"involved", std::move(involved)},
                                       {"highlight", std::move(highlight)}});
  }

  std::string store_timetable(std::shared_ptr<Timetable const> tt) {
    std::unique_lock lock(mutex_);
    auto id = "tt-" + std::to_string(++timetable_seq_);
    timetables_.emplace(id, std::move(tt));
    return id;
  }

  // Registers an ensemble loaded from disk under its own id.
  std::string store_ensemble(std::shared_ptr<Ensemble const> e) {
    std::unique_lock lock(mutex_);
    auto id = e->ensemble_id;
    if (!ensembles_.emplace(id, std::move(e)).second) {
      throw LookupError("ensemble id " + id + " is already in use");
    }
    return id;
  }

  std::shared_ptr<Timetable const> timetable(std::string const& id) const {
    std::shared_lock lock(mutex_);
    auto it = timetables_.find(id);
    if (it == timetables_.end()) detail::fail(404, "unknown timetable " + id);
    return it->second;
  }

  std::shared_ptr<Ensemble const> ensemble(std::string const& id) const {
    std::shared_lock lock(mutex_);
    auto it = ensembles_.find(id);
    if (it == ensembles_.end()) detail::fail(404, "unknown ensemble " + id);
    return it->second;
  }

private:
  ServiceOptions opts_;
  mutable std::shared_mutex mutex_;
  std::uint64_t timetable_seq_ = 0;
  std::uint64_t ensemble_seq_ = 0;
  std::map<std::string, std::shared_ptr<Timetable const>> timetables_;
  std::map<std::string, std::shared_ptr<Ensemble const>> ensembles_;
};

}  // namespace delaysim::service
