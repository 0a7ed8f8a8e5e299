// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/stats.hpp"

namespace delaysim {

// Arrival-lateness bands. Boundaries are half-open: [lo, hi).
enum class LatenessCategory : std::uint8_t {
  early,       // < 0
  min0_1,      // [0, 60)
  min1_3,      // [60, 180)
  min3_5,      // [180, 300)
  min5_10,     // [300, 600)
  min10_20,    // [600, 1200)
  min20_plus,  // [1200, inf)
};

inline constexpr std::size_t kLatenessCategoryCount = 7;
using CategoryCounts = std::array<std::uint32_t, kLatenessCategoryCount>;

inline constexpr LatenessCategory classify_lateness(Seconds lateness) {
  if (lateness < 0) return LatenessCategory::early;
  if (lateness < 60) return LatenessCategory::min0_1;
  if (lateness < 180) return LatenessCategory::min1_3;
  if (lateness < 300) return LatenessCategory::min3_5;
  if (lateness < 600) return LatenessCategory::min5_10;
  if (lateness < 1200) return LatenessCategory::min10_20;
  return LatenessCategory::min20_plus;
}

inline constexpr std::array<std::string_view, kLatenessCategoryCount> kLatenessCategoryNames = {
    "early", "0-1min", "1-3min", "3-5min", "5-10min", "10-20min", "20+min"};

// Representative lateness of each band, used to rank frequency columns.
// Early stops count as on time; the open 20+ band is taken as 25 minutes.
inline constexpr std::array<double, kLatenessCategoryCount> kLatenessCategoryMidpoints = {
    0, 30, 120, 240, 450, 900, 1500};

enum class ScalarKind {
  reactionary_caused,
  reactionary_suffered,
  primary_delay,
  destination_lateness,
  avg_stop_lateness,
};

inline constexpr std::string_view to_string(ScalarKind k) {
  switch (k) {
    case ScalarKind::reactionary_caused: return "reactionary_caused";
    case ScalarKind::reactionary_suffered: return "reactionary_suffered";
    case ScalarKind::primary_delay: return "primary_delay";
    case ScalarKind::destination_lateness: return "destination_lateness";
    case ScalarKind::avg_stop_lateness: return "avg_stop_lateness";
  }
  return "";
}

enum class AffectDirection { causes_delay_to, suffers_delay_from };

inline constexpr std::string_view to_string(AffectDirection d) {
  return d == AffectDirection::causes_delay_to ? "causes_delay_to" : "suffers_delay_from";
}

struct ScalarMetricCell {
  std::vector<double> per_run_values;
  stats::Summary summary;

  bool operator==(ScalarMetricCell const&) const = default;
};

struct ProfilePoint {
  Seconds position = 0;  // scheduled offset from the first departure
  Seconds lateness = 0;

  bool operator==(ProfilePoint const&) const = default;
};

struct ProfileMetricCell {
  std::vector<std::vector<ProfilePoint>> per_run_series;
  std::vector<double> binned_average;

  bool operator==(ProfileMetricCell const&) const = default;
};

struct FrequencyMetricCell {
  std::vector<CategoryCounts> per_run_counts;
  std::array<double, kLatenessCategoryCount> average_counts{};

  bool operator==(FrequencyMetricCell const&) const = default;
};

struct AffectEntry {
  TrainId other;
  Seconds seconds = 0;

  bool operator==(AffectEntry const&) const = default;
};

struct AffectMetricCell {
  AffectDirection direction = AffectDirection::suffers_delay_from;
  // Per run, sorted by seconds descending, ties by train id.
  std::vector<std::vector<AffectEntry>> per_run_breakdown;

  bool operator==(AffectMetricCell const&) const = default;

  std::vector<Seconds> per_run_totals() const {
    std::vector<Seconds> out;
    out.reserve(per_run_breakdown.size());
    for (auto const& run : per_run_breakdown) {
      Seconds s = 0;
      for (auto const& e : run) s += e.seconds;
      out.push_back(s);
    }
    return out;
  }
};

inline ScalarMetricCell make_scalar_cell(std::vector<double> values) {
  ScalarMetricCell c;
  c.summary = stats::summarize(values);
  c.per_run_values = std::move(values);
  return c;
}

inline FrequencyMetricCell make_frequency_cell(std::vector<CategoryCounts> counts) {
  FrequencyMetricCell c;
  for (auto const& run : counts) {
    for (std::size_t k = 0; k < kLatenessCategoryCount; ++k) c.average_counts[k] += run[k];
  }
  if (!counts.empty()) {
    for (auto& a : c.average_counts) a /= static_cast<double>(counts.size());
  }
  c.per_run_counts = std::move(counts);
  return c;
}

// Per-run lookups over an ensemble: train index by id and the attribution
// ledger grouped by causer and by sufferer.
class EnsembleIndex {
public:
  explicit EnsembleIndex(Ensemble const& e) : ensemble_(&e), index_(e.timetable->train_index()) {
    auto n_trains = e.timetable->trains.size();
    runs_.resize(e.runs.size());
    for (std::size_t r = 0; r < e.runs.size(); ++r) {
      auto const& run = e.runs[r];
      auto& idx = runs_[r];
      idx.primary.assign(n_trains, 0);
      for (auto const& ev : run.primary_events) idx.primary[train(ev.train_id)] += ev.delay;
      group(run, idx.by_causer, n_trains, [](Attribution const& a) -> TrainId const& { return a.causer; });
      group(run, idx.by_sufferer, n_trains, [](Attribution const& a) -> TrainId const& { return a.sufferer; });
    }
  }

  Ensemble const& ensemble() const { return *ensemble_; }
  Timetable const& timetable() const { return *ensemble_->timetable; }
  std::size_t n_runs() const { return ensemble_->runs.size(); }

  std::size_t train(TrainId const& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw LookupError("unknown train " + id);
    return it->second;
  }

  Seconds arrival_lateness(std::size_t run, std::size_t t, std::size_t i) const {
    return ensemble_->runs[run].times[t][i].arrival -
           timetable().trains[t].stops[i].arrival();
  }

  Seconds primary_total(std::size_t run, std::size_t t) const { return runs_[run].primary[t]; }

  template <typename F>
  void for_each_attribution(std::size_t run, std::size_t t, AffectDirection d, F&& f) const {
    auto const& g = d == AffectDirection::causes_delay_to ? runs_[run].by_causer : runs_[run].by_sufferer;
    auto const& ledger = ensemble_->runs[run].attributions;
    for (auto k = g.offsets[t]; k < g.offsets[t + 1]; ++k) f(ledger[g.items[k]]);
  }

private:
  struct Grouping {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> items;
  };
  struct RunIndex {
    std::vector<Seconds> primary;
    Grouping by_causer;
    Grouping by_sufferer;
  };

  template <typename Key>
  void group(RunResult const& run, Grouping& g, std::size_t n_trains, Key key) {
    std::vector<std::uint32_t> owner(run.attributions.size());
    g.offsets.assign(n_trains + 1, 0);
    for (std::size_t k = 0; k < run.attributions.size(); ++k) {
      owner[k] = static_cast<std::uint32_t>(train(key(run.attributions[k])));
      ++g.offsets[owner[k] + 1];
    }
    for (std::size_t t = 0; t < n_trains; ++t) g.offsets[t + 1] += g.offsets[t];
    g.items.resize(run.attributions.size());
    auto fill = g.offsets;
    for (std::size_t k = 0; k < run.attributions.size(); ++k) {
      g.items[fill[owner[k]]++] = static_cast<std::uint32_t>(k);
    }
  }

  Ensemble const* ensemble_;
  std::unordered_map<TrainId, std::size_t> index_;
  std::vector<RunIndex> runs_;
};

inline ScalarMetricCell scalar_metric(EnsembleIndex const& idx, ScalarKind kind,
                                      TrainId const& train_id) {
  auto t = idx.train(train_id);
  auto const& train = idx.timetable().trains[t];
  std::vector<double> values(idx.n_runs(), 0);
  for (std::size_t r = 0; r < idx.n_runs(); ++r) {
    Seconds v = 0;
    switch (kind) {
      case ScalarKind::reactionary_caused:
      case ScalarKind::reactionary_suffered:
        idx.for_each_attribution(
            r, t,
            kind == ScalarKind::reactionary_caused ? AffectDirection::causes_delay_to
                                                   : AffectDirection::suffers_delay_from,
            [&](Attribution const& a) { v += a.seconds; });
        values[r] = static_cast<double>(v);
        break;
      case ScalarKind::primary_delay:
        values[r] = static_cast<double>(idx.primary_total(r, t));
        break;
      case ScalarKind::destination_lateness:
        values[r] = static_cast<double>(idx.arrival_lateness(r, t, train.stops.size() - 1));
        break;
      case ScalarKind::avg_stop_lateness:
        for (std::size_t i = 0; i < train.stops.size(); ++i) v += idx.arrival_lateness(r, t, i);
        values[r] = static_cast<double>(v) / static_cast<double>(train.stops.size());
        break;
    }
  }
  return make_scalar_cell(std::move(values));
}

inline ScalarMetricCell scalar_metric(Ensemble const& e, ScalarKind kind, TrainId const& train_id) {
  return scalar_metric(EnsembleIndex(e), kind, train_id);
}

// Passenger-seconds of lateness: sum over stops of max(0, arrival lateness)
// times the load at that stop. destination_lateness weighs the final stop
// only; avg_stop_lateness weighs every stop.
inline ScalarMetricCell passenger_weight(EnsembleIndex const& idx, ScalarKind kind,
                                         TrainId const& train_id) {
  if (kind != ScalarKind::destination_lateness && kind != ScalarKind::avg_stop_lateness) {
    throw MetricError("passenger weighting needs a lateness kind, got " +
                      std::string(to_string(kind)));
  }
  auto t = idx.train(train_id);
  auto const& train = idx.timetable().trains[t];
  std::size_t first = kind == ScalarKind::destination_lateness ? train.stops.size() - 1 : 0;
  for (std::size_t i = first; i < train.stops.size(); ++i) {
    if (!train.stops[i].passenger_load) {
      throw MetricError("train " + train_id + " stop " + std::to_string(i) +
                        " has no passenger_load");
    }
  }
  std::vector<double> values(idx.n_runs(), 0);
  for (std::size_t r = 0; r < idx.n_runs(); ++r) {
    Seconds v = 0;
    for (std::size_t i = first; i < train.stops.size(); ++i) {
      v += std::max<Seconds>(0, idx.arrival_lateness(r, t, i)) * *train.stops[i].passenger_load;
    }
    values[r] = static_cast<double>(v);
  }
  return make_scalar_cell(std::move(values));
}

inline ScalarMetricCell passenger_weight(Ensemble const& e, ScalarKind kind, TrainId const& train_id) {
  return passenger_weight(EnsembleIndex(e), kind, train_id);
}

// Bins are right-closed partitions of [0, duration]: position 0 belongs to the
// first bin, a position on an interior edge to the bin ending there.
inline std::size_t profile_bin(Seconds position, Seconds duration, std::size_t n_bins) {
  if (position <= 0 || duration <= 0) return 0;
  auto scaled = static_cast<std::uint64_t>(position) * n_bins;
  auto d = static_cast<std::uint64_t>(duration);
  auto b = (scaled + d - 1) / d;
  return std::min<std::size_t>(b == 0 ? 0 : b - 1, n_bins - 1);
}

inline ProfileMetricCell lateness_profile(EnsembleIndex const& idx, TrainId const& train_id,
                                          std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be at least 1");
  auto t = idx.train(train_id);
  auto const& train = idx.timetable().trains[t];
  Seconds origin = train.first_departure();
  Seconds duration = train.last_arrival() - origin;

  ProfileMetricCell c;
  c.per_run_series.resize(idx.n_runs());
  std::vector<double> sum(n_bins, 0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t r = 0; r < idx.n_runs(); ++r) {
    auto& series = c.per_run_series[r];
    series.reserve(train.stops.size());
    for (std::size_t i = 0; i < train.stops.size(); ++i) {
      Seconds pos = std::max<Seconds>(0, train.stops[i].arrival() - origin);
      Seconds late = idx.arrival_lateness(r, t, i);
      series.push_back({pos, late});
      auto b = profile_bin(pos, duration, n_bins);
      sum[b] += static_cast<double>(late);
      ++count[b];
    }
  }
  c.binned_average.resize(n_bins);
  double carried = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b]) carried = sum[b] / static_cast<double>(count[b]);
    c.binned_average[b] = carried;
  }
  return c;
}

inline ProfileMetricCell lateness_profile(Ensemble const& e, TrainId const& train_id,
                                          std::size_t n_bins) {
  return lateness_profile(EnsembleIndex(e), train_id, n_bins);
}

inline FrequencyMetricCell lateness_frequencies(EnsembleIndex const& idx, TrainId const& train_id) {
  auto t = idx.train(train_id);
  auto n_stops = idx.timetable().trains[t].stops.size();
  std::vector<CategoryCounts> counts(idx.n_runs(), CategoryCounts{});
  for (std::size_t r = 0; r < idx.n_runs(); ++r) {
    for (std::size_t i = 0; i < n_stops; ++i) {
      ++counts[r][static_cast<std::size_t>(classify_lateness(idx.arrival_lateness(r, t, i)))];
    }
  }
  return make_frequency_cell(std::move(counts));
}

inline FrequencyMetricCell lateness_frequencies(Ensemble const& e, TrainId const& train_id) {
  return lateness_frequencies(EnsembleIndex(e), train_id);
}

inline AffectMetricCell affecting_trains(EnsembleIndex const& idx, TrainId const& train_id,
                                         AffectDirection direction) {
  auto t = idx.train(train_id);
  AffectMetricCell c;
  c.direction = direction;
  c.per_run_breakdown.resize(idx.n_runs());
  for (std::size_t r = 0; r < idx.n_runs(); ++r) {
    auto& out = c.per_run_breakdown[r];
    idx.for_each_attribution(r, t, direction, [&](Attribution const& a) {
      auto const& other = direction == AffectDirection::causes_delay_to ? a.sufferer : a.causer;
      auto it = std::find_if(out.begin(), out.end(),
                             [&](AffectEntry const& e) { return e.other == other; });
      if (it == out.end()) {
        out.push_back({other, a.seconds});
      } else {
        it->seconds += a.seconds;
      }
    });
    std::sort(out.begin(), out.end(), [](AffectEntry const& a, AffectEntry const& b) {
      if (a.seconds != b.seconds) return a.seconds > b.seconds;
      return a.other < b.other;
    });
  }
  return c;
}

inline AffectMetricCell affecting_trains(Ensemble const& e, TrainId const& train_id,
                                         AffectDirection direction) {
  return affecting_trains(EnsembleIndex(e), train_id, direction);
}

}  // namespace delaysim
