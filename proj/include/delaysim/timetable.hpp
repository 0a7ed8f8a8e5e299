// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "delaysim/time.hpp"

namespace delaysim {

using TrainId = std::string;
using ResourceId = std::string;
using StationId = std::string;

struct StationStop {
  StationId station_id;
  // Absent at the origin; treated as equal to sched_departure.
  std::optional<Seconds> sched_arrival;
  Seconds sched_departure = 0;
  std::optional<ResourceId> platform_resource;
  // Absent at the terminal stop.
  std::optional<ResourceId> outbound_segment;
  std::optional<std::int64_t> passenger_load;

  Seconds arrival() const { return sched_arrival.value_or(sched_departure); }
  Seconds dwell() const { return sched_departure - arrival(); }

  bool operator==(StationStop const&) const = default;
};

struct TrainService {
  TrainId train_id;
  std::string category;
  std::vector<StationStop> stops;

  Seconds first_departure() const { return stops.front().sched_departure; }
  Seconds last_arrival() const { return stops.back().arrival(); }

  bool operator==(TrainService const&) const = default;
};

enum class ResourceKind { segment, platform };

inline char const* to_string(ResourceKind k) {
  return k == ResourceKind::segment ? "segment" : "platform";
}

struct Resource {
  ResourceId resource_id;
  ResourceKind kind = ResourceKind::segment;
  Seconds min_headway = 0;

  bool operator==(Resource const&) const = default;
};

struct Timetable {
  std::vector<TrainService> trains;
  std::vector<Resource> resources;

  bool operator==(Timetable const&) const = default;

  std::unordered_map<TrainId, std::size_t> train_index() const {
    std::unordered_map<TrainId, std::size_t> out;
    out.reserve(trains.size());
    for (std::size_t i = 0; i < trains.size(); ++i) {
      out.emplace(trains[i].train_id, i);
    }
    return out;
  }

  Resource const* find_resource(ResourceId const& id) const {
    for (auto const& r : resources) {
      if (r.resource_id == id) return &r;
    }
    return nullptr;
  }

  bool has_passenger_loads() const {
    for (auto const& t : trains) {
      for (auto const& s : t.stops) {
        if (!s.passenger_load) return false;
      }
    }
    return true;
  }

  std::size_t stop_count() const {
    std::size_t n = 0;
    for (auto const& t : trains) n += t.stops.size();
    return n;
  }
};

// A broken invariant, located at a train/stop or a resource.
struct Violation {
  std::string message;
  std::optional<std::size_t> train;     // index into Timetable::trains
  std::optional<std::size_t> stop;      // index into that train's stops
  std::optional<std::size_t> resource;  // index into Timetable::resources
  std::string field;                    // offending field, when one applies
};

namespace detail {

inline std::string stop_label(TrainService const& t, std::size_t i) {
  return "train " + t.train_id + " stop " + std::to_string(i) + " (" +
         t.stops[i].station_id + ")";
}

}  // namespace detail

inline std::vector<Violation> find_violations(Timetable const& tt) {
  std::vector<Violation> out;

  std::map<ResourceId, ResourceKind> kinds;
  for (std::size_t k = 0; k < tt.resources.size(); ++k) {
    auto const& r = tt.resources[k];
    if (r.resource_id.empty()) {
      out.push_back({"resource with empty id", {}, {}, k, "resource_id"});
      continue;
    }
    if (!kinds.emplace(r.resource_id, r.kind).second) {
      out.push_back({"resource " + r.resource_id + ": duplicate id", {}, {}, k, "resource_id"});
    }
    if (r.min_headway <= 0) {
      out.push_back({"resource " + r.resource_id + ": min_headway must be positive, got " +
                         std::to_string(r.min_headway),
                     {}, {}, k, "min_headway_seconds"});
    }
  }

  std::set<TrainId> seen;
  for (std::size_t ti = 0; ti < tt.trains.size(); ++ti) {
    auto const& t = tt.trains[ti];
    auto at_stop = [&](std::size_t i, std::string msg, std::string field) {
      out.push_back({detail::stop_label(t, i) + ": " + std::move(msg), ti, i, {}, std::move(field)});
    };
    auto check_ref = [&](std::size_t i, ResourceId const& id, ResourceKind want,
                         char const* field) {
      auto it = kinds.find(id);
      if (it == kinds.end()) {
        at_stop(i, std::string(field) + " references undefined resource " + id, field);
      } else if (it->second != want) {
        at_stop(i, std::string(field) + " " + id + " is a " + to_string(it->second) +
                       ", expected " + to_string(want),
                field);
      }
    };

    if (t.train_id.empty()) {
      out.push_back({"train with empty id", ti, {}, {}, "train_id"});
    } else if (!seen.insert(t.train_id).second) {
      out.push_back({"train " + t.train_id + ": duplicate id", ti, {}, {}, "train_id"});
    }
    if (t.stops.size() < 2) {
      out.push_back({"train " + t.train_id + ": needs at least 2 stops, has " +
                         std::to_string(t.stops.size()),
                     ti, {}, {}, "stop_seq"});
    }
    for (std::size_t i = 0; i < t.stops.size(); ++i) {
      auto const& s = t.stops[i];
      bool last = i + 1 == t.stops.size();
      if (s.sched_departure < 0 || s.arrival() < 0) {
        at_stop(i, "negative time", "sched_departure");
      }
      if (s.sched_departure < s.arrival()) {
        at_stop(i, "sched_departure before sched_arrival", "sched_departure");
      }
      if (i > 0 && s.arrival() <= t.stops[i - 1].sched_departure) {
        at_stop(i, "arrival not after previous departure", "sched_arrival");
      }
      if (!last && !s.outbound_segment) {
        at_stop(i, "missing outbound_segment", "outbound_segment");
      }
      if (last && s.outbound_segment) {
        at_stop(i, "terminal stop has outbound_segment " + *s.outbound_segment, "outbound_segment");
      }
      if (s.outbound_segment) {
        check_ref(i, *s.outbound_segment, ResourceKind::segment, "outbound_segment");
      }
      if (s.platform_resource) {
        check_ref(i, *s.platform_resource, ResourceKind::platform, "platform_resource");
      }
      if (s.passenger_load && *s.passenger_load < 0) {
        at_stop(i, "negative passenger_load", "passenger_load");
      }
    }
  }
  return out;
}

// One human-readable description per violated invariant; empty iff the
// timetable is well formed and every resource reference resolves.
inline std::vector<std::string> validate_timetable(Timetable const& tt) {
  std::vector<std::string> out;
  for (auto& v : find_violations(tt)) out.push_back(std::move(v.message));
  return out;
}

}  // namespace delaysim
