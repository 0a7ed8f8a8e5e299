// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaysim/timetable.hpp"

namespace delaysim {

// Number of running trains per category in each time-of-day bin.
struct TemporalHistogram {
  int bin_minutes = 30;
  std::vector<std::string> categories;           // sorted
  std::vector<std::vector<std::uint32_t>> counts;  // [bin][category]

  Seconds bin_start(std::size_t b) const { return static_cast<Seconds>(b) * bin_minutes * 60; }
  bool operator==(TemporalHistogram const&) const = default;
};

// A train is active over [first departure, last arrival) and counts in every
// half-open bin that interval overlaps. Bins cover the day and extend past
// midnight as far as the latest arrival.
inline TemporalHistogram temporal_histogram(Timetable const& tt, int bin_minutes = 30) {
  if (bin_minutes <= 0 || 1440 % bin_minutes != 0) {
    throw std::invalid_argument("bin_minutes must divide 1440");
  }
  TemporalHistogram h;
  h.bin_minutes = bin_minutes;
  std::map<std::string, std::size_t> cat;
  Seconds latest = 0;
  for (auto const& t : tt.trains) {
    cat.emplace(t.category, 0);
    if (!t.stops.empty()) latest = std::max(latest, t.last_arrival());
  }
  for (auto& [name, k] : cat) {
    k = h.categories.size();
    h.categories.push_back(name);
  }
  Seconds width = static_cast<Seconds>(bin_minutes) * 60;
  auto n_bins = std::max<std::size_t>(static_cast<std::size_t>(1440 / bin_minutes),
                                      static_cast<std::size_t>((latest + width - 1) / width));
  h.counts.assign(n_bins, std::vector<std::uint32_t>(h.categories.size(), 0));
  for (auto const& t : tt.trains) {
    if (t.stops.empty()) continue;
    Seconds start = t.first_departure();
    Seconds end = t.last_arrival();
    if (end <= start) continue;
    auto first = static_cast<std::size_t>(std::max<Seconds>(0, start) / width);
    auto last = static_cast<std::size_t>((end - 1) / width);
    for (auto b = first; b <= last && b < n_bins; ++b) ++h.counts[b][cat.at(t.category)];
  }
  return h;
}

}  // namespace delaysim
