// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/metrics.hpp"
#include "delaysim/resource_plan.hpp"

namespace delaysim {

struct StationCall {
  std::size_t train = 0;
  std::size_t stop = 0;
};

// Ensemble outcomes regrouped with station stops as cases.
//
// A station suffers the reactionary delay of every wait imposed at a stop
// there. The same wait counts as caused at the station from which the
// causer entered the shared resource (the platform's station, or the
// departure station of a segment), so both totals partition the ledger.
struct StationView {
  std::vector<StationId> case_ids;                 // sorted
  std::vector<std::vector<StationCall>> calls;     // per station
  std::vector<std::set<std::string>> categories;   // of calling trains
  // [station][run]
  std::vector<std::vector<Seconds>> suffered;
  std::vector<std::vector<Seconds>> caused;
  std::vector<std::vector<Seconds>> primary;
  std::vector<std::vector<double>> avg_lateness;
  std::vector<std::vector<Seconds>> weighted_lateness;  // empty without loads
  std::vector<std::vector<CategoryCounts>> frequency;

  bool has_passenger_loads() const { return !weighted_lateness.empty(); }

  std::size_t station(StationId const& id) const {
    auto it = std::lower_bound(case_ids.begin(), case_ids.end(), id);
    if (it == case_ids.end() || *it != id) throw LookupError("unknown station " + id);
    return static_cast<std::size_t>(it - case_ids.begin());
  }
};

inline StationView aggregate_by_station(Ensemble const& e) {
  auto const& tt = *e.timetable;
  auto index = tt.train_index();
  StationView v;

  std::map<StationId, std::size_t> ids;
  for (auto const& t : tt.trains) {
    for (auto const& s : t.stops) ids.emplace(s.station_id, 0);
  }
  for (auto& [id, k] : ids) {
    k = v.case_ids.size();
    v.case_ids.push_back(id);
  }
  auto n_st = v.case_ids.size();
  auto n_runs = e.runs.size();
  v.calls.resize(n_st);
  v.categories.resize(n_st);

  for (std::size_t t = 0; t < tt.trains.size(); ++t) {
    auto const& train = tt.trains[t];
    for (std::size_t i = 0; i < train.stops.size(); ++i) {
      auto st = ids.at(train.stops[i].station_id);
      v.calls[st].push_back({t, i});
      v.categories[st].insert(train.category);
    }
  }

  // (resource, follower train, follower stop) -> station of the leader's use.
  std::map<std::tuple<ResourceId, std::size_t, std::size_t>, std::size_t> leader_station;
  for (auto const& [res, uses] : build_resource_plan(tt).order) {
    for (std::size_t k = 1; k < uses.size(); ++k) {
      auto lead = index.at(uses[k - 1].train_id);
      leader_station.emplace(std::tuple{res, index.at(uses[k].train_id), uses[k].stop_index},
                             ids.at(tt.trains[lead].stops[uses[k - 1].stop_index].station_id));
    }
  }

  auto grid = [&](auto zero) {
    return std::vector<std::vector<decltype(zero)>>(n_st, std::vector<decltype(zero)>(n_runs, zero));
  };
  v.suffered = grid(Seconds{0});
  v.caused = grid(Seconds{0});
  v.primary = grid(Seconds{0});
  v.avg_lateness = grid(0.0);
  v.frequency = grid(CategoryCounts{});
  bool loads = tt.has_passenger_loads();
  if (loads) v.weighted_lateness = grid(Seconds{0});

  for (std::size_t r = 0; r < n_runs; ++r) {
    auto const& run = e.runs[r];
    for (auto const& a : run.attributions) {
      auto sufferer = index.at(a.sufferer);
      auto const& stop = tt.trains[sufferer].stops.at(a.sufferer_stop_index);
      v.suffered[ids.at(stop.station_id)][r] += a.seconds;
      auto it = leader_station.find({a.resource_id, sufferer, a.sufferer_stop_index});
      if (it == leader_station.end()) {
        throw LookupError("attribution on " + a.resource_id + " to " + a.sufferer +
                          " has no preceding resource user");
      }
      v.caused[it->second][r] += a.seconds;
    }
    for (auto const& ev : run.primary_events) {
      auto const& stop = tt.trains[index.at(ev.train_id)].stops.at(ev.stop_index);
      v.primary[ids.at(stop.station_id)][r] += ev.delay;
    }
    for (std::size_t st = 0; st < n_st; ++st) {
      Seconds sum = 0;
      for (auto const& c : v.calls[st]) {
        auto const& stop = tt.trains[c.train].stops[c.stop];
        Seconds late = run.times[c.train][c.stop].arrival - stop.arrival();
        sum += late;
        ++v.frequency[st][r][static_cast<std::size_t>(classify_lateness(late))];
        if (loads) v.weighted_lateness[st][r] += std::max<Seconds>(0, late) * *stop.passenger_load;
      }
      v.avg_lateness[st][r] =
          v.calls[st].empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(v.calls[st].size());
    }
  }
  return v;
}

}  // namespace delaysim
