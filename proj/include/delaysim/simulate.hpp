// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "delaysim/delay_model.hpp"
#include "delaysim/error.hpp"
#include "delaysim/resource_plan.hpp"
#include "delaysim/rng.hpp"
#include "delaysim/timetable.hpp"

namespace delaysim {

struct SimParams {
  // Late trains run segments at sched_runtime * (1 - recovery_allowance).
  double recovery_allowance = 0.05;
  // Incompressible share of the scheduled dwell, floored at min_dwell_floor
  // and never more than the scheduled dwell itself.
  double min_dwell_fraction = 0.5;
  Seconds min_dwell_floor = 30;
  // Half-width of uniform integer noise added to each segment runtime.
  Seconds runtime_jitter = 0;

  bool operator==(SimParams const&) const = default;
};

inline void validate_sim_params(SimParams const& p) {
  if (!(p.recovery_allowance >= 0 && p.recovery_allowance <= 0.2)) {
    throw ConfigError("recovery_allowance must lie in [0, 0.2]");
  }
  if (!(p.min_dwell_fraction >= 0 && p.min_dwell_fraction <= 1)) {
    throw ConfigError("min_dwell_fraction must lie in [0, 1]");
  }
  if (p.min_dwell_floor < 0) throw ConfigError("min_dwell_floor must be non-negative");
  if (p.runtime_jitter < 0) throw ConfigError("runtime_jitter must be non-negative");
}

// One reactionary wait: `sufferer` was held at `resource_id` because
// `causer` was the previous user and the headway was not yet clear.
struct Attribution {
  std::size_t run_index = 0;
  TrainId causer;
  TrainId sufferer;
  ResourceId resource_id;
  Seconds seconds = 0;
  std::size_t sufferer_stop_index = 0;

  bool operator==(Attribution const&) const = default;
};

struct StopTimes {
  Seconds arrival = 0;
  Seconds departure = 0;

  bool operator==(StopTimes const&) const = default;
};

struct RunResult {
  std::size_t run_index = 0;
  // times[t][i] for timetable train t, stop i.
  std::vector<std::vector<StopTimes>> times;
  std::vector<PrimaryDelayEvent> primary_events;
  std::vector<Attribution> attributions;

  bool operator==(RunResult const&) const = default;

  Seconds total_attribution_seconds() const {
    Seconds s = 0;
    for (auto const& a : attributions) s += a.seconds;
    return s;
  }
};

// The timetable and resource plan flattened into a dependency-ordered list of
// arrival and departure events. Only depends on the schedule, so one
// instance serves every run of an ensemble.
class CompiledSchedule {
public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  CompiledSchedule(Timetable const& tt, ResourcePlan const& plan) : tt_(&tt) {
    offsets_.reserve(tt.trains.size() + 1);
    std::uint32_t n = 0;
    for (auto const& t : tt.trains) {
      offsets_.push_back(n);
      n += static_cast<std::uint32_t>(t.stops.size());
    }
    offsets_.push_back(n);
    index_ = tt.train_index();

    nodes_.resize(std::size_t{2} * n);
    for (std::uint32_t t = 0; t < tt.trains.size(); ++t) {
      for (std::uint32_t i = 0; i < tt.trains[t].stops.size(); ++i) {
        nodes_[arrival_node(t, i)].train = t;
        nodes_[arrival_node(t, i)].stop = i;
        nodes_[departure_node(t, i)].train = t;
        nodes_[departure_node(t, i)].stop = i;
      }
    }
    link_resources(plan);
    sort_topologically();
  }

  struct Node {
    std::uint32_t train = 0;
    std::uint32_t stop = 0;
    std::uint32_t resource_pred = kNone;  // node of previous resource user
    Resource const* resource = nullptr;
  };

  std::uint32_t arrival_node(std::uint32_t t, std::uint32_t i) const {
    return 2 * (offsets_[t] + i);
  }
  std::uint32_t departure_node(std::uint32_t t, std::uint32_t i) const {
    return 2 * (offsets_[t] + i) + 1;
  }
  static bool is_departure(std::uint32_t node) { return node & 1U; }

  Timetable const& timetable() const { return *tt_; }
  std::vector<Node> const& nodes() const { return nodes_; }
  std::vector<std::uint32_t> const& order() const { return order_; }
  std::uint32_t stop_offset(std::uint32_t t) const { return offsets_[t]; }
  std::uint32_t stop_count() const { return offsets_.back(); }

  std::uint32_t train_of(TrainId const& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? kNone : static_cast<std::uint32_t>(it->second);
  }

private:
  void link_resources(ResourcePlan const& plan) {
    auto const& tt = *tt_;
    std::size_t expected = 0;
    for (auto const& t : tt.trains) {
      for (auto const& s : t.stops) {
        expected += s.outbound_segment.has_value() + s.platform_resource.has_value();
      }
    }
    std::size_t seen = 0;
    for (auto const& [id, uses] : plan.order) {
      auto const* res = tt.find_resource(id);
      if (!res) throw SimulationError("resource plan names unknown resource " + id);
      std::uint32_t prev = kNone;
      for (auto const& use : uses) {
        auto t = train_of(use.train_id);
        if (t == kNone || use.stop_index >= tt.trains[t].stops.size()) {
          throw SimulationError("resource plan entry " + use.train_id + "/" +
                                std::to_string(use.stop_index) + " on " + id +
                                " does not exist in the timetable");
        }
        auto i = static_cast<std::uint32_t>(use.stop_index);
        auto const& stop = tt.trains[t].stops[i];
        bool is_seg = res->kind == ResourceKind::segment;
        auto const& ref = is_seg ? stop.outbound_segment : stop.platform_resource;
        if (!ref || *ref != id) {
          throw SimulationError("resource plan entry " + use.train_id + "/" +
                                std::to_string(i) + " does not use " + id);
        }
        auto node = is_seg ? departure_node(t, i) : arrival_node(t, i);
        if (nodes_[node].resource) {
          throw SimulationError("resource plan lists " + use.train_id + "/" +
                                std::to_string(i) + " on " + id + " twice");
        }
        nodes_[node].resource = res;
        nodes_[node].resource_pred = prev;
        prev = node;
        ++seen;
      }
    }
    if (seen != expected) {
      throw SimulationError("resource plan is missing " +
                            std::to_string(expected - seen) + " resource uses");
    }
  }

  // Predecessors of a node: its own previous event and the previous user of
  // its resource.
  std::uint32_t chain_pred(std::uint32_t node) const {
    if (is_departure(node)) return node - 1;
    return nodes_[node].stop == 0 ? kNone : node - 1;
  }

  std::string describe(std::uint32_t node) const {
    auto const& n = nodes_[node];
    return tt_->trains[n.train].train_id + (is_departure(node) ? " dep" : " arr") +
           "@" + std::to_string(n.stop) +
           (n.resource ? " [" + n.resource->resource_id + "]" : "");
  }

  void sort_topologically() {
    auto const total = static_cast<std::uint32_t>(nodes_.size());
    std::vector<std::uint8_t> indegree(total, 0);
    std::vector<std::uint32_t> resource_succ(total, kNone);
    for (std::uint32_t v = 0; v < total; ++v) {
      if (chain_pred(v) != kNone) ++indegree[v];
      if (nodes_[v].resource_pred != kNone) {
        ++indegree[v];
        resource_succ[nodes_[v].resource_pred] = v;
      }
    }
    order_.clear();
    order_.reserve(total);
    std::vector<std::uint32_t> ready;
    for (std::uint32_t v = total; v-- > 0;) {
      if (indegree[v] == 0) ready.push_back(v);
    }
    auto release = [&](std::uint32_t v) {
      if (v != kNone && --indegree[v] == 0) ready.push_back(v);
    };
    while (!ready.empty()) {
      auto v = ready.back();
      ready.pop_back();
      order_.push_back(v);
      bool last_dep = is_departure(v) &&
                      nodes_[v].stop + 1 == tt_->trains[nodes_[v].train].stops.size();
      if (!last_dep) release(v + 1);
      release(resource_succ[v]);
    }
    if (order_.size() == total) return;

    // Every unprocessed node still has an unprocessed predecessor, so walking
    // predecessors must revisit a node.
    std::uint32_t start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<std::uint32_t> path;
    std::vector<std::int64_t> pos(total, -1);
    auto v = start;
    while (pos[v] < 0) {
      pos[v] = static_cast<std::int64_t>(path.size());
      path.push_back(v);
      auto p = chain_pred(v);
      v = (p != kNone && indegree[p] > 0) ? p : nodes_[v].resource_pred;
    }
    std::vector<std::uint32_t> cycle(path.begin() + pos[v], path.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string msg = "cyclic resource dependency: ";
    for (auto c : cycle) msg += describe(c) + " -> ";
    throw SimulationError(msg + describe(cycle.front()));
  }

  Timetable const* tt_;
  std::vector<std::uint32_t> offsets_;
  std::unordered_map<TrainId, std::size_t> index_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

namespace detail {

inline Seconds min_dwell(StationStop const& s, SimParams const& p) {
  Seconds dwell = s.dwell();
  auto share = static_cast<Seconds>(std::ceil(p.min_dwell_fraction * static_cast<double>(dwell)));
  return std::min(dwell, std::max(p.min_dwell_floor, share));
}

inline Seconds compressed_runtime(Seconds runtime, double allowance) {
  return runtime - static_cast<Seconds>(std::floor(static_cast<double>(runtime) * allowance));
}

}  // namespace detail

inline RunResult simulate_run(CompiledSchedule const& schedule,
                              std::vector<PrimaryDelayEvent> primary_events,
                              SimParams const& params, std::size_t run_index,
                              std::uint64_t master_seed = 0) {
  validate_sim_params(params);
  auto const& tt = schedule.timetable();
  auto const& nodes = schedule.nodes();

  std::vector<Seconds> extra(schedule.stop_count(), 0);
  for (auto const& e : primary_events) {
    auto t = schedule.train_of(e.train_id);
    if (t == CompiledSchedule::kNone || e.stop_index >= tt.trains[t].stops.size()) {
      throw SimulationError("primary delay event for unknown stop " + e.train_id +
                            "/" + std::to_string(e.stop_index));
    }
    if (e.delay <= 0) {
      throw SimulationError("primary delay event " + e.train_id + "/" +
                            std::to_string(e.stop_index) + " has non-positive delay");
    }
    extra[schedule.stop_offset(t) + e.stop_index] += e.delay;
  }

  std::vector<Seconds> at(nodes.size(), 0);
  struct Pending {
    std::uint32_t node;
    Attribution attribution;
  };
  std::vector<Pending> ledger;

  for (auto v : schedule.order()) {
    auto const& n = nodes[v];
    auto const& train = tt.trains[n.train];
    auto const& stop = train.stops[n.stop];
    Seconds value = 0;
    if (!CompiledSchedule::is_departure(v)) {
      if (n.stop == 0) {
        value = stop.arrival();
      } else {
        auto const& prev = train.stops[n.stop - 1];
        Seconds dep = at[v - 1];
        Seconds runtime = stop.arrival() - prev.sched_departure;
        if (dep > prev.sched_departure) {
          runtime = detail::compressed_runtime(runtime, params.recovery_allowance);
        }
        value = std::max(stop.arrival(), dep + runtime);
        if (params.runtime_jitter > 0) {
          SplitMix64 rng(draw_key(master_seed, DrawStream::runtime_jitter, run_index,
                                  train.train_id, n.stop));
          auto width = static_cast<double>(2 * params.runtime_jitter + 1);
          value += static_cast<Seconds>(std::floor(rng.uniform() * width)) -
                   params.runtime_jitter;
          value = std::max(value, dep);
        }
      }
    } else {
      value = std::max(stop.sched_departure, at[v - 1] + detail::min_dwell(stop, params)) +
              extra[schedule.stop_offset(n.train) + n.stop];
    }
    if (n.resource_pred != CompiledSchedule::kNone) {
      Seconds required = at[n.resource_pred] + n.resource->min_headway;
      if (required > value) {
        ledger.push_back({v,
                          {run_index, tt.trains[nodes[n.resource_pred].train].train_id,
                           train.train_id, n.resource->resource_id, required - value,
                           n.stop}});
        value = required;
      }
    }
    at[v] = value;
  }

  RunResult out;
  out.run_index = run_index;
  out.times.resize(tt.trains.size());
  for (std::uint32_t t = 0; t < tt.trains.size(); ++t) {
    auto& row = out.times[t];
    row.resize(tt.trains[t].stops.size());
    for (std::uint32_t i = 0; i < row.size(); ++i) {
      row[i] = {at[schedule.arrival_node(t, i)], at[schedule.departure_node(t, i)]};
    }
  }
  std::sort(ledger.begin(), ledger.end(),
            [](Pending const& a, Pending const& b) { return a.node < b.node; });
  out.attributions.reserve(ledger.size());
  for (auto& p : ledger) out.attributions.push_back(std::move(p.attribution));
  for (auto& e : primary_events) e.run_index = run_index;
  out.primary_events = std::move(primary_events);
  return out;
}

// Simulates one day. Pure: the same inputs always give the same result.
inline RunResult simulate_run(Timetable const& tt, ResourcePlan const& plan,
                              std::vector<PrimaryDelayEvent> primary_events,
                              SimParams const& params, std::size_t run_index,
                              std::uint64_t master_seed = 0) {
  CompiledSchedule schedule(tt, plan);
  return simulate_run(schedule, std::move(primary_events), params, run_index, master_seed);
}

}  // namespace delaysim
