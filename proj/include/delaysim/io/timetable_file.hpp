// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// Timetable text format.
//
//   [resources]
//   resource_id,kind,min_headway_seconds
//   SEG1,segment,120
//   [stops]
//   train_id,category,stop_seq,station_id,sched_arrival,sched_departure,platform_resource,outbound_segment,passenger_load
//   1A01,express,1,AAA,,08:00:00,,SEG1,120
//
// Comma separated, no quoting. Blank lines and lines starting with '#' are
// ignored. Each section starts with a header row; columns may appear in any
// order and the optional ones (sched_arrival, platform_resource,
// outbound_segment, passenger_load) may be omitted entirely. Empty
// sched_arrival means "same as departure" (origin); empty sched_departure is
// allowed on the last stop and means "same as arrival". Times are HH:MM:SS up
// to 30:00:00. A file without section markers holds stops only; resources
// then come from a sidecar file in the same [resources] layout.

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "delaysim/error.hpp"
#include "delaysim/time.hpp"
#include "delaysim/timetable.hpp"

namespace delaysim::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

inline std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t n = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++n;
    auto t = trim(raw);
    if (!t.empty() && t.front() != '#') out.push_back({n, t});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

// Maps header names to field positions for one section.
class Header {
public:
  Header(Line const& line, std::vector<std::string_view> required,
         std::vector<std::string_view> optional)
      : line_(line.number) {
    auto names = split_fields(line.text);
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto name = std::string(names[i]);
      bool known = std::find(required.begin(), required.end(), names[i]) != required.end() ||
                   std::find(optional.begin(), optional.end(), names[i]) != optional.end();
      if (!known) throw ParseError(line_, name, "unknown column");
      if (!pos_.emplace(name, i).second) throw ParseError(line_, name, "duplicate column");
    }
    for (auto r : required) {
      if (!pos_.count(std::string(r))) throw ParseError(line_, std::string(r), "missing required column");
    }
    width_ = names.size();
  }

  std::size_t width() const { return width_; }

  std::string_view get(std::vector<std::string_view> const& f, std::string const& name) const {
    auto it = pos_.find(name);
    return it == pos_.end() ? std::string_view{} : f[it->second];
  }

private:
  std::size_t line_;
  std::size_t width_ = 0;
  std::map<std::string, std::size_t> pos_;
};

inline std::int64_t parse_int(std::string_view s, std::size_t line, char const* column) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError(line, column, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline Seconds parse_time(std::string_view s, std::size_t line, char const* column) {
  auto t = parse_clock(s);
  if (!t) {
    throw ParseError(line, column,
                     "invalid time '" + std::string(s) + "' (expected HH:MM:SS up to 30:00:00)");
  }
  return *t;
}

inline std::optional<std::string> opt_string(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

}  // namespace detail


namespace detail {

struct Section {
  std::vector<Line> lines;
};

inline void parse_resources(std::vector<Line> const& lines, Timetable& tt,
                            std::vector<std::size_t>& resource_lines) {
  if (lines.empty()) return;
  Header h(lines.front(), {"resource_id", "kind", "min_headway_seconds"}, {});
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto const& ln = lines[k];
    auto f = split_fields(ln.text);
    if (f.size() != h.width()) {
      throw ParseError(ln.number, "", "expected " + std::to_string(h.width()) + " fields, got " +
                                          std::to_string(f.size()));
    }
    Resource r;
    r.resource_id = std::string(h.get(f, "resource_id"));
    if (r.resource_id.empty()) throw ParseError(ln.number, "resource_id", "empty resource id");
    auto kind = h.get(f, "kind");
    if (kind == "segment") {
      r.kind = ResourceKind::segment;
    } else if (kind == "platform") {
      r.kind = ResourceKind::platform;
    } else {
      throw ParseError(ln.number, "kind", "expected 'segment' or 'platform', got '" + std::string(kind) + "'");
    }
    r.min_headway = parse_int(h.get(f, "min_headway_seconds"), ln.number, "min_headway_seconds");
    tt.resources.push_back(std::move(r));
    resource_lines.push_back(ln.number);
  }
}

inline void parse_stops(std::vector<Line> const& lines, Timetable& tt,
                        std::vector<std::vector<std::size_t>>& stop_lines) {
  if (lines.empty()) return;
  Header h(lines.front(), {"train_id", "category", "stop_seq", "station_id", "sched_departure"},
           {"sched_arrival", "platform_resource", "outbound_segment", "passenger_load"});

  struct Row {
    std::int64_t seq;
    std::size_t line;
    StationStop stop;
    bool departure_blank;
  };
  std::vector<std::pair<TrainService, std::vector<Row>>> trains;
  std::unordered_map<std::string, std::size_t> by_id;

  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto const& ln = lines[k];
    auto f = split_fields(ln.text);
    if (f.size() != h.width()) {
      throw ParseError(ln.number, "", "expected " + std::to_string(h.width()) + " fields, got " +
                                          std::to_string(f.size()));
    }
    auto id = std::string(h.get(f, "train_id"));
    if (id.empty()) throw ParseError(ln.number, "train_id", "empty train id");
    auto category = std::string(h.get(f, "category"));
    auto [it, fresh] = by_id.emplace(id, trains.size());
    if (fresh) {
      trains.push_back({TrainService{id, category, {}}, {}});
    } else if (trains[it->second].first.category != category) {
      throw ParseError(ln.number, "category",
                       "train " + id + " has conflicting categories '" +
                           trains[it->second].first.category + "' and '" + category + "'");
    }

    Row row;
    row.line = ln.number;
    row.seq = parse_int(h.get(f, "stop_seq"), ln.number, "stop_seq");
    row.stop.station_id = std::string(h.get(f, "station_id"));
    if (row.stop.station_id.empty()) throw ParseError(ln.number, "station_id", "empty station id");
    auto arr = h.get(f, "sched_arrival");
    if (!arr.empty()) row.stop.sched_arrival = parse_time(arr, ln.number, "sched_arrival");
    auto dep = h.get(f, "sched_departure");
    row.departure_blank = dep.empty();
    if (!dep.empty()) {
      row.stop.sched_departure = parse_time(dep, ln.number, "sched_departure");
    } else if (row.stop.sched_arrival) {
      row.stop.sched_departure = *row.stop.sched_arrival;
    } else {
      throw ParseError(ln.number, "sched_departure", "stop has neither arrival nor departure time");
    }
    row.stop.platform_resource = opt_string(h.get(f, "platform_resource"));
    row.stop.outbound_segment = opt_string(h.get(f, "outbound_segment"));
    auto load = h.get(f, "passenger_load");
    if (!load.empty()) row.stop.passenger_load = parse_int(load, ln.number, "passenger_load");

    auto& rows = trains[it->second].second;
    for (auto const& other : rows) {
      if (other.seq == row.seq) {
        throw ParseError(ln.number, "stop_seq",
                         "duplicate stop_seq " + std::to_string(row.seq) + " for train " + id +
                             " (first on line " + std::to_string(other.line) + ")");
      }
    }
    rows.push_back(std::move(row));
  }

  for (auto& [train, rows] : trains) {
    std::sort(rows.begin(), rows.end(), [](Row const& a, Row const& b) { return a.seq < b.seq; });
    auto& lines_out = stop_lines.emplace_back();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].departure_blank && i + 1 != rows.size()) {
        throw ParseError(rows[i].line, "sched_departure",
                         "only the last stop of train " + train.train_id + " may omit its departure");
      }
      train.stops.push_back(std::move(rows[i].stop));
      lines_out.push_back(rows[i].line);
    }
    tt.trains.push_back(std::move(train));
  }
}

inline void split_sections(std::string_view text, std::vector<Line>& resources,
                           std::vector<Line>& stops) {
  auto lines = content_lines(text);
  std::vector<Line>* current = nullptr;
  bool any_marker = false;
  for (auto const& ln : lines) {
    if (ln.text == "[resources]") {
      current = &resources;
      any_marker = true;
    } else if (ln.text == "[stops]") {
      current = &stops;
      any_marker = true;
    } else if (!ln.text.empty() && ln.text.front() == '[') {
      throw ParseError(ln.number, "", "unknown section " + std::string(ln.text));
    } else {
      if (!current) {
        if (any_marker) throw ParseError(ln.number, "", "content before first section");
        current = &stops;
      }
      current->push_back(ln);
    }
  }
}

}  // namespace detail

// Parses and validates. Throws ParseError naming the line (and column where
// one applies) of the first problem found.
inline Timetable parse_timetable(std::string_view text, std::string_view resources_sidecar = {}) {
  std::vector<detail::Line> res_lines;
  std::vector<detail::Line> stop_lines;
  detail::split_sections(text, res_lines, stop_lines);
  if (!resources_sidecar.empty()) {
    std::vector<detail::Line> side_res;
    std::vector<detail::Line> side_stops;
    detail::split_sections(resources_sidecar, side_res, side_stops);
    if (side_res.empty()) side_res = std::move(side_stops);
    if (!res_lines.empty()) {
      throw ParseError(res_lines.front().number, "", "resources given both inline and in a sidecar");
    }
    res_lines = std::move(side_res);
  }

  Timetable tt;
  std::vector<std::size_t> resource_at;
  std::vector<std::vector<std::size_t>> stop_at;
  detail::parse_resources(res_lines, tt, resource_at);
  detail::parse_stops(stop_lines, tt, stop_at);

  auto violations = find_violations(tt);
  if (!violations.empty()) {
    auto const& v = violations.front();
    std::size_t line = 0;
    if (v.resource) {
      line = resource_at[*v.resource];
    } else if (v.train && v.stop) {
      line = stop_at[*v.train][*v.stop];
    } else if (v.train && !stop_at[*v.train].empty()) {
      line = stop_at[*v.train].front();
    }
    std::string msg = v.message;
    if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
    throw ParseError(line, v.field, msg, true);
  }
  return tt;
}

// Canonical text form: resources first, stops in train order with 1-based
// stop_seq. parse_timetable(write_timetable(t)) == t.
inline std::string write_timetable(Timetable const& tt) {
  std::string out = "[resources]\nresource_id,kind,min_headway_seconds\n";
  for (auto const& r : tt.resources) {
    out += r.resource_id + "," + to_string(r.kind) + "," + std::to_string(r.min_headway) + "\n";
  }
  out +=
      "[stops]\ntrain_id,category,stop_seq,station_id,sched_arrival,sched_departure,"
      "platform_resource,outbound_segment,passenger_load\n";
  for (auto const& t : tt.trains) {
    for (std::size_t i = 0; i < t.stops.size(); ++i) {
      auto const& s = t.stops[i];
      out += t.train_id + "," + t.category + "," + std::to_string(i + 1) + "," + s.station_id + ",";
      if (s.sched_arrival) out += format_clock(*s.sched_arrival);
      out += "," + format_clock(s.sched_departure) + ",";
      out += s.platform_resource.value_or("") + "," + s.outbound_segment.value_or("") + ",";
      if (s.passenger_load) out += std::to_string(*s.passenger_load);
      out += "\n";
    }
  }
  return out;
}

}  // namespace delaysim::io
