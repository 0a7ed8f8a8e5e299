// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "delaysim/error.hpp"
#include "delaysim/rng.hpp"
#include "delaysim/timetable.hpp"

namespace delaysim {

struct ExponentialDelay {
  double mean_seconds = 0;
  bool operator==(ExponentialDelay const&) const = default;
};

// Parameters of the underlying normal distribution of log-seconds.
struct LognormalDelay {
  double mu = 0;
  double sigma = 0;
  bool operator==(LognormalDelay const&) const = default;
};

struct EmpiricalDelay {
  std::vector<std::pair<Seconds, double>> points;  // (seconds, weight)
  bool operator==(EmpiricalDelay const&) const = default;
};

using DelayMagnitude = std::variant<ExponentialDelay, LognormalDelay, EmpiricalDelay>;

inline constexpr char const* kAnyCategory = "*";

struct DelayRule {
  std::string selector;  // train category or "*"
  double per_stop_probability = 0;
  DelayMagnitude magnitude;

  bool operator==(DelayRule const&) const = default;
};

// First matching rule wins.
struct DelayConfig {
  std::vector<DelayRule> rules;

  bool operator==(DelayConfig const&) const = default;

  DelayRule const* match(std::string const& category) const {
    for (auto const& r : rules) {
      if (r.selector == kAnyCategory || r.selector == category) return &r;
    }
    return nullptr;
  }
};

struct PrimaryDelayEvent {
  TrainId train_id;
  std::size_t stop_index = 0;
  Seconds delay = 0;
  std::size_t run_index = 0;

  bool operator==(PrimaryDelayEvent const&) const = default;
};

// Sampled magnitudes are capped at one day.
inline constexpr Seconds kMaxPrimaryDelay = 24 * kSecondsPerHour;

inline void validate_delay_config(DelayConfig const& cfg) {
  for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
    auto const& r = cfg.rules[i];
    std::string where = "delay rule " + std::to_string(i) + " (" + r.selector + ")";
    if (r.selector.empty()) throw ConfigError(where + ": empty selector");
    if (!(r.per_stop_probability >= 0 && r.per_stop_probability <= 1)) {
      throw ConfigError(where + ": per_stop_probability outside [0, 1]");
    }
    std::visit(
        [&](auto const& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ExponentialDelay>) {
            if (!(m.mean_seconds > 0)) throw ConfigError(where + ": exponential mean must be positive");
          } else if constexpr (std::is_same_v<M, LognormalDelay>) {
            if (!std::isfinite(m.mu) || !(m.sigma >= 0)) {
              throw ConfigError(where + ": lognormal needs finite mu and sigma >= 0");
            }
          } else {
            if (m.points.empty()) throw ConfigError(where + ": empirical distribution is empty");
            for (auto const& [sec, w] : m.points) {
              if (!(w > 0)) throw ConfigError(where + ": empirical weights must be positive");
              if (sec < 0) throw ConfigError(where + ": empirical seconds must be non-negative");
            }
          }
        },
        r.magnitude);
  }
}

namespace detail {

inline Seconds round_up_delay(double seconds) {
  if (!(seconds < static_cast<double>(kMaxPrimaryDelay))) return kMaxPrimaryDelay;
  auto s = static_cast<Seconds>(std::ceil(seconds));
  return s < 1 ? 1 : s;
}

inline Seconds draw_magnitude(DelayMagnitude const& m, SplitMix64& rng) {
  return std::visit(
      [&](auto const& d) -> Seconds {
        using M = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<M, ExponentialDelay>) {
          return round_up_delay(-d.mean_seconds * std::log1p(-rng.uniform()));
        } else if constexpr (std::is_same_v<M, LognormalDelay>) {
          double u1 = rng.uniform();
          double u2 = rng.uniform();
          double z = std::sqrt(-2.0 * std::log1p(-u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
          return round_up_delay(std::exp(d.mu + d.sigma * z));
        } else {
          double total = 0;
          for (auto const& p : d.points) total += p.second;
          double target = rng.uniform() * total;
          double acc = 0;
          for (auto const& [sec, w] : d.points) {
            acc += w;
            if (target < acc) return round_up_delay(static_cast<double>(sec));
          }
          return round_up_delay(static_cast<double>(d.points.back().first));
        }
      },
      m);
}

}  // namespace detail

// One Bernoulli trial per (train, stop) with the matched rule's probability;
// on success a magnitude is drawn and rounded up to whole seconds (>= 1).
// Events come out in timetable order.
inline std::vector<PrimaryDelayEvent> sample_primary_delays(Timetable const& tt,
                                                            DelayConfig const& cfg,
                                                            std::size_t run_index,
                                                            std::uint64_t master_seed) {
  validate_delay_config(cfg);
  std::vector<PrimaryDelayEvent> events;
  for (auto const& t : tt.trains) {
    auto const* rule = cfg.match(t.category);
    if (!rule) {
      throw ConfigError("no delay rule matches category '" + t.category +
                        "' of train " + t.train_id + " and no '*' rule exists");
    }
    if (rule->per_stop_probability <= 0) continue;
    for (std::size_t i = 0; i < t.stops.size(); ++i) {
      SplitMix64 rng(draw_key(master_seed, DrawStream::primary_delay, run_index,
                              t.train_id, i));
      if (rng.uniform() >= rule->per_stop_probability) continue;
      events.push_back({t.train_id, i, detail::draw_magnitude(rule->magnitude, rng),
                        run_index});
    }
  }
  return events;
}

}  // namespace delaysim
