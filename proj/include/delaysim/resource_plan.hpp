// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "delaysim/error.hpp"
#include "delaysim/timetable.hpp"

namespace delaysim {

struct ResourceUse {
  TrainId train_id;
  std::size_t stop_index = 0;

  bool operator==(ResourceUse const&) const = default;
};

// Per resource, the scheduled order in which trains enter it. The simulator
// never lets a train overtake its predecessor in this order.
struct ResourcePlan {
  std::map<ResourceId, std::vector<ResourceUse>> order;

  bool operator==(ResourcePlan const&) const = default;
};

// Scheduled time at which a stop enters the resource: departure for the
// outbound segment, arrival for the platform.
inline Seconds scheduled_entry(StationStop const& stop, ResourceKind kind) {
  return kind == ResourceKind::segment ? stop.sched_departure : stop.arrival();
}

inline void require_valid(Timetable const& tt) {
  auto violations = validate_timetable(tt);
  if (violations.empty()) return;
  std::string msg = "invalid timetable (" + std::to_string(violations.size()) +
                    " violation" + (violations.size() == 1 ? "" : "s") + "): ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) msg += "; ";
    msg += violations[i];
  }
  throw ValidationError(msg);
}

inline ResourcePlan build_resource_plan(Timetable const& tt) {
  require_valid(tt);

  struct Entry {
    Seconds time;
    TrainId const* train;
    std::size_t stop;
  };
  std::map<ResourceId, std::vector<Entry>> staged;
  for (auto const& t : tt.trains) {
    for (std::size_t i = 0; i < t.stops.size(); ++i) {
      auto const& s = t.stops[i];
      if (s.outbound_segment) {
        staged[*s.outbound_segment].push_back(
            {scheduled_entry(s, ResourceKind::segment), &t.train_id, i});
      }
      if (s.platform_resource) {
        staged[*s.platform_resource].push_back(
            {scheduled_entry(s, ResourceKind::platform), &t.train_id, i});
      }
    }
  }

  ResourcePlan plan;
  for (auto& [id, entries] : staged) {
    std::sort(entries.begin(), entries.end(),
              [](Entry const& a, Entry const& b) {
                return std::tie(a.time, *a.train, a.stop) <
                       std::tie(b.time, *b.train, b.stop);
              });
    auto& uses = plan.order[id];
    uses.reserve(entries.size());
    for (auto const& e : entries) uses.push_back({*e.train, e.stop});
  }
  return plan;
}

struct ScheduleConflict {
  ResourceId resource_id;
  ResourceUse leader;
  ResourceUse follower;
  Seconds scheduled_gap = 0;
  Seconds min_headway = 0;
};

// Consecutive plan entries whose scheduled entry times are closer than the
// resource headway. Such a timetable picks up delay even without any
// primary delay.
inline std::vector<ScheduleConflict> schedule_conflicts(Timetable const& tt,
                                                        ResourcePlan const& plan) {
  auto index = tt.train_index();
  std::vector<ScheduleConflict> out;
  for (auto const& [id, uses] : plan.order) {
    auto const* res = tt.find_resource(id);
    if (!res) continue;
    for (std::size_t k = 1; k < uses.size(); ++k) {
      auto const& a = uses[k - 1];
      auto const& b = uses[k];
      auto ta = scheduled_entry(tt.trains[index.at(a.train_id)].stops[a.stop_index],
                                res->kind);
      auto tb = scheduled_entry(tt.trains[index.at(b.train_id)].stops[b.stop_index],
                                res->kind);
      if (tb - ta < res->min_headway) {
        out.push_back({id, a, b, tb - ta, res->min_headway});
      }
    }
  }
  return out;
}

}  // namespace delaysim
