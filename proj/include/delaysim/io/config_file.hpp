// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// JSON forms of DelayConfig and SimParams.
//
//   {"rules": [
//     {"selector": "express", "per_stop_probability": 0.05,
//      "magnitude": {"distribution": "lognormal", "mu": 5.0, "sigma": 0.8}},
//     {"selector": "*", "per_stop_probability": 0.1,
//      "magnitude": {"distribution": "exponential", "mean_seconds": 180}},
//     ...  {"distribution": "empirical", "points": [[300, 1.0], [600, 0.5]]}
//   ]}
//
//   {"recovery_allowance": 0.05, "min_dwell_fraction": 0.5,
//    "min_dwell_floor": 30, "runtime_jitter": 0}
//
// Missing SimParams keys take their defaults.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "delaysim/delay_model.hpp"
#include "delaysim/error.hpp"
#include "delaysim/simulate.hpp"

namespace delaysim::io {

using nlohmann::json;

inline json to_json(DelayConfig const& cfg) {
  json rules = json::array();
  for (auto const& r : cfg.rules) {
    json m = std::visit(
        [](auto const& d) -> json {
          using M = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<M, ExponentialDelay>) {
            return {{"distribution", "exponential"}, {"mean_seconds", d.mean_seconds}};
          } else if constexpr (std::is_same_v<M, LognormalDelay>) {
            return {{"distribution", "lognormal"}, {"mu", d.mu}, {"sigma", d.sigma}};
          } else {
            json pts = json::array();
            for (auto const& [s, w] : d.points) pts.push_back({s, w});
            return {{"distribution", "empirical"}, {"points", pts}};
          }
        },
        r.magnitude);
    rules.push_back({{"selector", r.selector},
                     {"per_stop_probability", r.per_stop_probability},
                     {"magnitude", m}});
  }
  return {{"rules", rules}};
}

inline DelayConfig delay_config_from_json(json const& j) {
  try {
    DelayConfig cfg;
    for (auto const& r : j.at("rules")) {
      DelayRule rule;
      rule.selector = r.at("selector").get<std::string>();
      rule.per_stop_probability = r.at("per_stop_probability").get<double>();
      auto const& m = r.at("magnitude");
      auto dist = m.at("distribution").get<std::string>();
      if (dist == "exponential") {
        rule.magnitude = ExponentialDelay{m.at("mean_seconds").get<double>()};
      } else if (dist == "lognormal") {
        rule.magnitude = LognormalDelay{m.at("mu").get<double>(), m.at("sigma").get<double>()};
      } else if (dist == "empirical") {
        EmpiricalDelay e;
        for (auto const& p : m.at("points")) {
          e.points.emplace_back(p.at(0).get<Seconds>(), p.at(1).get<double>());
        }
        rule.magnitude = std::move(e);
      } else {
        throw ConfigError("unknown distribution '" + dist + "'");
      }
      cfg.rules.push_back(std::move(rule));
    }
    validate_delay_config(cfg);
    return cfg;
  } catch (json::exception const& e) {
    throw ConfigError(std::string("malformed delay config: ") + e.what());
  }
}

inline json to_json(SimParams const& p) {
  return {{"recovery_allowance", p.recovery_allowance},
          {"min_dwell_fraction", p.min_dwell_fraction},
          {"min_dwell_floor", p.min_dwell_floor},
          {"runtime_jitter", p.runtime_jitter}};
}

inline SimParams sim_params_from_json(json const& j) {
  try {
    SimParams p;
    if (!j.is_object()) throw ConfigError("sim params must be a JSON object");
    for (auto const& [key, value] : j.items()) {
      if (key == "recovery_allowance") {
        p.recovery_allowance = value.get<double>();
      } else if (key == "min_dwell_fraction") {
        p.min_dwell_fraction = value.get<double>();
      } else if (key == "min_dwell_floor") {
        p.min_dwell_floor = value.get<Seconds>();
      } else if (key == "runtime_jitter") {
        p.runtime_jitter = value.get<Seconds>();
      } else {
        throw ConfigError("unknown sim parameter '" + key + "'");
      }
    }
    validate_sim_params(p);
    return p;
  } catch (json::exception const& e) {
    throw ConfigError(std::string("malformed sim params: ") + e.what());
  }
}

inline json parse_json_text(std::string_view text, char const* what) {
  try {
    return json::parse(text);
  } catch (json::parse_error const& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

inline DelayConfig parse_delay_config(std::string_view text) {
  return delay_config_from_json(parse_json_text(text, "delay config"));
}

inline SimParams parse_sim_params(std::string_view text) {
  return sim_params_from_json(parse_json_text(text, "sim params"));
}

}  // namespace delaysim::io
