// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "delaysim/delay_model.hpp"
#include "delaysim/resource_plan.hpp"
#include "delaysim/rng.hpp"
#include "delaysim/simulate.hpp"
#include "delaysim/timetable.hpp"

namespace delaysim {

// A set of simulated alternative days. Immutable once built.
struct Ensemble {
  std::string ensemble_id;
  std::shared_ptr<Timetable const> timetable;
  DelayConfig delay_config;
  SimParams sim_params;
  std::uint64_t master_seed = 0;
  std::vector<RunResult> runs;

  std::size_t n_runs() const { return runs.size(); }

  bool operator==(Ensemble const& o) const {
    return ensemble_id == o.ensemble_id && master_seed == o.master_seed &&
           delay_config == o.delay_config && sim_params == o.sim_params &&
           runs == o.runs &&
           (timetable == o.timetable ||
            (timetable && o.timetable && *timetable == *o.timetable));
  }
};

struct EnsembleOptions {
  std::string ensemble_id;   // derived from the inputs when empty
  unsigned threads = 0;      // 0 = hardware concurrency
};

namespace detail {

// Content fingerprint of the simulation inputs, used for default ids.
inline std::uint64_t input_fingerprint(Timetable const& tt, DelayConfig const& cfg,
                                       SimParams const& p, std::size_t n_runs,
                                       std::uint64_t seed) {
  std::uint64_t h = splitmix64_mix(seed ^ n_runs);
  auto mix = [&](std::uint64_t v) { h = splitmix64_mix(h ^ v); };
  auto mix_s = [&](std::string_view s) { mix(fnv1a64(s)); };
  for (auto const& r : tt.resources) {
    mix_s(r.resource_id);
    mix(static_cast<std::uint64_t>(r.kind));
    mix(static_cast<std::uint64_t>(r.min_headway));
  }
  for (auto const& t : tt.trains) {
    mix_s(t.train_id);
    mix_s(t.category);
    for (auto const& s : t.stops) {
      mix_s(s.station_id);
      mix(static_cast<std::uint64_t>(s.sched_arrival.value_or(-1)));
      mix(static_cast<std::uint64_t>(s.sched_departure));
      mix_s(s.platform_resource.value_or(""));
      mix_s(s.outbound_segment.value_or(""));
      mix(static_cast<std::uint64_t>(s.passenger_load.value_or(-1)));
    }
  }
  for (auto const& r : cfg.rules) {
    mix_s(r.selector);
    mix(std::bit_cast<std::uint64_t>(r.per_stop_probability));
    mix(r.magnitude.index());
    std::visit(
        [&](auto const& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ExponentialDelay>) {
            mix(std::bit_cast<std::uint64_t>(m.mean_seconds));
          } else if constexpr (std::is_same_v<M, LognormalDelay>) {
            mix(std::bit_cast<std::uint64_t>(m.mu));
            mix(std::bit_cast<std::uint64_t>(m.sigma));
          } else {
            for (auto const& [s, w] : m.points) {
              mix(static_cast<std::uint64_t>(s));
              mix(std::bit_cast<std::uint64_t>(w));
            }
          }
        },
        r.magnitude);
  }
  mix(std::bit_cast<std::uint64_t>(p.recovery_allowance));
  mix(std::bit_cast<std::uint64_t>(p.min_dwell_fraction));
  mix(static_cast<std::uint64_t>(p.min_dwell_floor));
  mix(static_cast<std::uint64_t>(p.runtime_jitter));
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

// runs[k] = simulate_run(sample_primary_delays(k)). Runs share nothing
// mutable and are computed in parallel, then stored in run-index order.
inline Ensemble run_ensemble(std::shared_ptr<Timetable const> tt, DelayConfig cfg,
                             SimParams params, std::size_t n_runs,
                             std::uint64_t master_seed, EnsembleOptions opts = {}) {
  if (!tt) throw SimulationError("run_ensemble: no timetable");
  if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
  validate_delay_config(cfg);
  validate_sim_params(params);
  auto plan = build_resource_plan(*tt);
  CompiledSchedule schedule(*tt, plan);

  Ensemble out;
  out.ensemble_id = opts.ensemble_id.empty()
                        ? "ens-" + detail::hex64(detail::input_fingerprint(
                                       *tt, cfg, params, n_runs, master_seed))
                        : opts.ensemble_id;
  out.runs.resize(n_runs);

  std::vector<std::exception_ptr> errors(n_runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_runs; k = next++) {
      try {
        auto events = sample_primary_delays(*tt, cfg, k, master_seed);
        out.runs[k] = simulate_run(schedule, std::move(events), params, k, master_seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, n_runs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k < n_runs; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (ConfigError const& e) {
      throw ConfigError("run " + std::to_string(k) + ": " + e.what());
    } catch (std::exception const& e) {
      throw SimulationError("run " + std::to_string(k) + ": " + e.what());
    }
  }

  out.timetable = std::move(tt);
  out.delay_config = std::move(cfg);
  out.sim_params = params;
  out.master_seed = master_seed;
  return out;
}

inline Ensemble run_ensemble(Timetable tt, DelayConfig cfg, SimParams params,
                             std::size_t n_runs, std::uint64_t master_seed,
                             EnsembleOptions opts = {}) {
  return run_ensemble(std::make_shared<Timetable const>(std::move(tt)), std::move(cfg),
                      params, n_runs, master_seed, std::move(opts));
}

}  // namespace delaysim
