// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "delaysim/delaysim.hpp"

namespace fixtures {

using delaysim::Seconds;

inline std::string id(char const* prefix, std::size_t n, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

inline delaysim::StationStop stop(std::string station, std::optional<Seconds> arr, Seconds dep,
                                  std::optional<std::string> seg = {},
                                  std::optional<std::string> platform = {}) {
  delaysim::StationStop s;
  s.station_id = std::move(station);
  s.sched_arrival = arr;
  s.sched_departure = dep;
  s.outbound_segment = std::move(seg);
  s.platform_resource = std::move(platform);
  return s;
}

// Two trains X -> Y over SEG1 (headway 120). A leaves at 08:00, B at
// 08:00 + b_offset.
inline delaysim::Timetable two_trains(Seconds b_offset = 240) {
  constexpr Seconds t0 = 8 * 3600;
  delaysim::Timetable tt;
  tt.resources = {{"SEG1", delaysim::ResourceKind::segment, 120}};
  tt.trains.push_back({"A", "express", {stop("X", {}, t0, "SEG1"), stop("Y", t0 + 600, t0 + 600)}});
  tt.trains.push_back({"B",
                       "stopping",
                       {stop("X", {}, t0 + b_offset, "SEG1"),
                        stop("Y", t0 + b_offset + 600, t0 + b_offset + 600)}});
  return tt;
}

struct CorridorOptions {
  std::size_t trains = 10;
  std::size_t stops = 5;
  std::size_t lines = 1;      // trains are dealt round-robin onto parallel lines
  Seconds first_departure = 6 * 3600;
  Seconds spacing = 600;      // between successive trains on one line
  Seconds runtime = 300;
  Seconds dwell = 60;
  Seconds headway = 120;
  bool platforms = true;
  bool loads = false;
};

// Identical stopping patterns, evenly spaced. Conflict-free whenever
// spacing >= headway.
inline delaysim::Timetable corridor(CorridorOptions const& o = {}) {
  static char const* const kCategories[] = {"express", "stopping", "freight"};
  delaysim::Timetable tt;
  for (std::size_t l = 0; l < o.lines; ++l) {
    auto line = id("L", l, 2);
    for (std::size_t k = 0; k + 1 < o.stops; ++k) {
      tt.resources.push_back({line + id("G", k, 2), delaysim::ResourceKind::segment, o.headway});
    }
    if (o.platforms) {
      for (std::size_t k = 1; k < o.stops; ++k) {
        tt.resources.push_back({line + id("P", k, 2), delaysim::ResourceKind::platform, o.headway});
      }
    }
  }
  for (std::size_t i = 0; i < o.trains; ++i) {
    auto line = id("L", i % o.lines, 2);
    Seconds t = o.first_departure + static_cast<Seconds>(i / o.lines) * o.spacing;
    delaysim::TrainService train{id("T", i, 4), kCategories[i % 3], {}};
    for (std::size_t k = 0; k < o.stops; ++k) {
      bool first = k == 0;
      bool last = k + 1 == o.stops;
      std::optional<Seconds> arr;
      if (!first) arr = t;
      Seconds dep = first ? t : (last ? t : t + o.dwell);
      auto s = stop(line + id("S", k, 2), arr, dep);
      if (!last) s.outbound_segment = line + id("G", k, 2);
      if (o.platforms && !first) s.platform_resource = line + id("P", k, 2);
      if (o.loads) s.passenger_load = static_cast<std::int64_t>(20 + 10 * ((i + k) % 7));
      train.stops.push_back(std::move(s));
      t = dep + o.runtime;
    }
    tt.trains.push_back(std::move(train));
  }
  return tt;
}

struct RandomOptions {
  std::size_t max_trains = 50;
  std::size_t max_stops = 10;
  std::size_t stations = 8;
  bool platforms = true;
  bool loads = true;
};

// Trains running over random contiguous stretches of one line in either
// direction with random timings, sharing direction-specific segments and
// station platforms. Usually contains scheduled conflicts.
inline delaysim::Timetable random_timetable(std::mt19937_64& rng, RandomOptions const& o = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto seconds = [&](Seconds lo, Seconds hi) {
    return std::uniform_int_distribution<Seconds>(lo, hi)(rng);
  };
  static char const* const kCategories[] = {"express", "stopping", "freight"};
  delaysim::Timetable tt;
  auto seg = [&](std::size_t a, std::size_t b) { return id("G", a, 2) + "_" + id("", b, 2); };
  for (std::size_t a = 0; a + 1 < o.stations; ++a) {
    tt.resources.push_back({seg(a, a + 1), delaysim::ResourceKind::segment, seconds(30, 240)});
    tt.resources.push_back({seg(a + 1, a), delaysim::ResourceKind::segment, seconds(30, 240)});
  }
  if (o.platforms) {
    for (std::size_t a = 0; a < o.stations; ++a) {
      tt.resources.push_back({id("P", a, 2), delaysim::ResourceKind::platform, seconds(30, 180)});
    }
  }
  auto n_trains = pick(2, o.max_trains);
  auto max_len = std::min(o.max_stops, o.stations);
  for (std::size_t i = 0; i < n_trains; ++i) {
    auto len = pick(2, max_len);
    auto from = pick(0, o.stations - len);
    bool reverse = pick(0, 1) == 1;
    delaysim::TrainService train{id("R", i, 3), kCategories[pick(0, 2)], {}};
    Seconds t = seconds(6 * 3600, 8 * 3600);
    for (std::size_t k = 0; k < len; ++k) {
      auto st = reverse ? from + len - 1 - k : from + k;
      bool first = k == 0;
      bool last = k + 1 == len;
      std::optional<Seconds> arr;
      if (!first) arr = t;
      Seconds dep = last ? t : t + (first ? 0 : seconds(0, 180));
      auto s = stop(id("S", st, 2), arr, dep);
      if (!last) s.outbound_segment = reverse ? seg(st, st - 1) : seg(st, st + 1);
      if (o.platforms && pick(0, 3) != 0) s.platform_resource = id("P", st, 2);
      if (o.loads) s.passenger_load = static_cast<std::int64_t>(pick(0, 300));
      train.stops.push_back(std::move(s));
      t = dep + seconds(60, 900);
    }
    tt.trains.push_back(std::move(train));
  }
  return tt;
}

inline delaysim::DelayConfig no_delays() {
  return {{{"*", 0.0, delaysim::ExponentialDelay{60}}}};
}

inline delaysim::DelayConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> p(0.05, 0.5);
  std::uniform_real_distribution<double> mean(30, 600);
  delaysim::DelayConfig cfg;
  cfg.rules.push_back({"express", p(rng), delaysim::LognormalDelay{std::log(mean(rng)), 0.8}});
  cfg.rules.push_back({"freight", p(rng),
                       delaysim::EmpiricalDelay{{{60, 2.0}, {300, 1.0}, {900, 0.5}}}});
  cfg.rules.push_back({"*", p(rng), delaysim::ExponentialDelay{mean(rng)}});
  return cfg;
}

inline delaysim::Ensemble ensemble(delaysim::Timetable tt, delaysim::DelayConfig cfg,
                                   std::size_t runs, std::uint64_t seed = 1,
                                   delaysim::SimParams params = {}) {
  return delaysim::run_ensemble(std::move(tt), std::move(cfg), params, runs, seed);
}

// Ensemble with hand-written runs over `tt`; times default to schedule.
inline delaysim::Ensemble manual_ensemble(delaysim::Timetable tt, std::size_t runs) {
  delaysim::Ensemble e;
  e.ensemble_id = "manual";
  e.timetable = std::make_shared<delaysim::Timetable const>(std::move(tt));
  e.delay_config = no_delays();
  for (std::size_t r = 0; r < runs; ++r) {
    delaysim::RunResult run;
    run.run_index = r;
    for (auto const& t : e.timetable->trains) {
      auto& times = run.times.emplace_back();
      for (auto const& s : t.stops) times.push_back({s.arrival(), s.sched_departure});
    }
    e.runs.push_back(std::move(run));
  }
  return e;
}

}  // namespace fixtures
