// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// Ensemble file: JSON lines, one ensemble per file.
//
//   line 1      header  {"format":"delaysim-ensemble","format_version":1,
//                        "ensemble_id":..,"master_seed":..,"n_runs":N,
//                        "timetable":"<timetable text>","delay_config":{..},
//                        "sim_params":{..}}
//   lines 2..N+1 runs   {"run":k,"times":[[arr0,dep0,arr1,dep1,..],..],
//                        "primary_events":[[train,stop,seconds],..],
//                        "attributions":[[causer,sufferer,resource,seconds,stop],..]}
//   last line   {"checksum":"fnv1a64:<16 hex digits>"}
//
// Runs are written in index order; "times" follows timetable train order.
// The checksum covers every byte before the checksum line. Object keys are
// emitted sorted, so identical ensembles give identical bytes.

#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/io/config_file.hpp"
#include "delaysim/io/timetable_file.hpp"
#include "delaysim/rng.hpp"

namespace delaysim::io {

inline constexpr int kEnsembleFormatVersion = 1;
inline constexpr std::string_view kEnsembleFormatName = "delaysim-ensemble";

namespace detail {

class Fnv1a64 {
public:
  void update(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string checksum_text(std::uint64_t v) {
  return "fnv1a64:" + delaysim::detail::hex64(v);
}

inline json run_to_json(RunResult const& run) {
  json times = json::array();
  for (auto const& row : run.times) {
    json flat = json::array();
    for (auto const& st : row) {
      flat.push_back(st.arrival);
      flat.push_back(st.departure);
    }
    times.push_back(std::move(flat));
  }
  json events = json::array();
  for (auto const& e : run.primary_events) events.push_back({e.train_id, e.stop_index, e.delay});
  json ledger = json::array();
  for (auto const& a : run.attributions) {
    ledger.push_back({a.causer, a.sufferer, a.resource_id, a.seconds, a.sufferer_stop_index});
  }
  return {{"run", run.run_index},
          {"times", std::move(times)},
          {"primary_events", std::move(events)},
          {"attributions", std::move(ledger)}};
}

inline RunResult run_from_json(json const& j, Timetable const& tt, std::size_t expected_index) {
  RunResult run;
  run.run_index = j.at("run").get<std::size_t>();
  if (run.run_index != expected_index) {
    throw FormatError("run " + std::to_string(expected_index) + " expected, found run " +
                      std::to_string(run.run_index));
  }
  auto const& times = j.at("times");
  if (times.size() != tt.trains.size()) throw FormatError("run times do not match the timetable");
  run.times.resize(tt.trains.size());
  for (std::size_t t = 0; t < tt.trains.size(); ++t) {
    auto const& flat = times[t];
    if (flat.size() != 2 * tt.trains[t].stops.size()) {
      throw FormatError("run " + std::to_string(run.run_index) + ": wrong stop count for train " +
                        tt.trains[t].train_id);
    }
    for (std::size_t i = 0; i < tt.trains[t].stops.size(); ++i) {
      run.times[t].push_back({flat[2 * i].get<Seconds>(), flat[2 * i + 1].get<Seconds>()});
    }
  }
  for (auto const& e : j.at("primary_events")) {
    run.primary_events.push_back({e.at(0).get<std::string>(), e.at(1).get<std::size_t>(),
                                  e.at(2).get<Seconds>(), run.run_index});
  }
  for (auto const& a : j.at("attributions")) {
    run.attributions.push_back({run.run_index, a.at(0).get<std::string>(), a.at(1).get<std::string>(),
                                a.at(2).get<std::string>(), a.at(3).get<Seconds>(),
                                a.at(4).get<std::size_t>()});
  }
  return run;
}

}  // namespace detail

// Streams the file; each line is written as soon as it is formed.
inline void write_ensemble(Ensemble const& e, std::ostream& os) {
  detail::Fnv1a64 sum;
  auto emit = [&](json const& j) {
    auto line = j.dump() + "\n";
    sum.update(line);
    os << line;
  };
  emit({{"format", kEnsembleFormatName},
        {"format_version", kEnsembleFormatVersion},
        {"ensemble_id", e.ensemble_id},
        {"master_seed", e.master_seed},
        {"n_runs", e.runs.size()},
        {"timetable", write_timetable(*e.timetable)},
        {"delay_config", to_json(e.delay_config)},
        {"sim_params", to_json(e.sim_params)}});
  for (auto const& run : e.runs) emit(detail::run_to_json(run));
  os << json{{"checksum", detail::checksum_text(sum.value())}}.dump() << "\n";
}

inline std::string write_ensemble(Ensemble const& e) {
  std::ostringstream os;
  write_ensemble(e, os);
  return os.str();
}

inline Ensemble read_ensemble(std::string_view bytes) {
  auto header_end = bytes.find('\n');
  if (header_end == std::string_view::npos) throw FormatError("truncated ensemble file: no header");
  json header;
  try {
    header = json::parse(bytes.substr(0, header_end));
  } catch (json::exception const& ex) {
    throw FormatError(std::string("malformed ensemble header: ") + ex.what());
  }
  if (!header.is_object() || header.value("format", "") != kEnsembleFormatName) {
    throw FormatError("not a delaysim ensemble file");
  }
  auto version = header.value("format_version", -1);
  if (version != kEnsembleFormatVersion) {
    throw FormatError("unsupported ensemble format_version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kEnsembleFormatVersion) + ")");
  }

  // Last non-empty line must be the checksum.
  auto body = bytes;
  while (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  auto last_start = body.rfind('\n');
  if (last_start == std::string_view::npos || last_start < header_end) {
    throw FormatError("truncated ensemble file: no checksum line");
  }
  auto covered = bytes.substr(0, last_start + 1);
  std::string expected;
  try {
    auto tail = json::parse(body.substr(last_start + 1));
    expected = tail.at("checksum").get<std::string>();
  } catch (json::exception const&) {
    throw FormatError("truncated ensemble file: no checksum line");
  }
  detail::Fnv1a64 sum;
  sum.update(covered);
  if (detail::checksum_text(sum.value()) != expected) {
    throw FormatError("ensemble checksum mismatch: file is corrupt");
  }

  try {
    Ensemble e;
    e.ensemble_id = header.at("ensemble_id").get<std::string>();
    e.master_seed = header.at("master_seed").get<std::uint64_t>();
    auto n_runs = header.at("n_runs").get<std::size_t>();
    auto tt = std::make_shared<Timetable const>(parse_timetable(header.at("timetable").get<std::string>()));
    e.delay_config = delay_config_from_json(header.at("delay_config"));
    e.sim_params = sim_params_from_json(header.at("sim_params"));

    std::size_t pos = header_end + 1;
    while (pos < covered.size()) {
      auto end = covered.find('\n', pos);
      auto line = covered.substr(pos, end - pos);
      pos = end + 1;
      if (line.empty()) continue;
      e.runs.push_back(detail::run_from_json(json::parse(line), *tt, e.runs.size()));
    }
    if (e.runs.size() != n_runs) {
      throw FormatError("truncated ensemble file: header declares " + std::to_string(n_runs) +
                        " runs, found " + std::to_string(e.runs.size()));
    }
    e.timetable = std::move(tt);
    return e;
  } catch (json::exception const& ex) {
    throw FormatError(std::string("malformed ensemble file: ") + ex.what());
  } catch (ParseError const& ex) {
    throw FormatError(std::string("ensemble timetable snapshot: ") + ex.what());
  } catch (ConfigError const& ex) {
    throw FormatError(std::string("ensemble config snapshot: ") + ex.what());
  }
}

}  // namespace delaysim::io
