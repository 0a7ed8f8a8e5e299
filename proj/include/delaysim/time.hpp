// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace delaysim {

// Seconds since midnight of the operating day. Services running past
// midnight keep counting (up to 30:00:00).
using Seconds = std::int64_t;

inline constexpr Seconds kSecondsPerMinute = 60;
inline constexpr Seconds kSecondsPerHour = 3600;
inline constexpr Seconds kLatestClockTime = 30 * kSecondsPerHour;

// Parses "HH:MM:SS" with HH in [0, 30] and the result not past 30:00:00.
inline std::optional<Seconds> parse_clock(std::string_view text) {
  if (text.size() != 8 || text[2] != ':' || text[5] != ':') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos) -> std::optional<int> {
    int v = 0;
    char const* first = text.data() + pos;
    char const* last = first + 2;
    if (first[0] < '0' || first[0] > '9' || first[1] < '0' || first[1] > '9') {
      return std::nullopt;
    }
    std::from_chars(first, last, v);
    return v;
  };
  auto h = field(0);
  auto m = field(3);
  auto s = field(6);
  if (!h || !m || !s || *m > 59 || *s > 59) {
    return std::nullopt;
  }
  Seconds total = *h * kSecondsPerHour + *m * kSecondsPerMinute + *s;
  if (total > kLatestClockTime) {
    return std::nullopt;
  }
  return total;
}

inline std::string format_clock(Seconds t) {
  auto two = [](Seconds v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
  };
  bool neg = t < 0;
  if (neg) t = -t;
  std::string out = two(t / kSecondsPerHour) + ":" +
                    two((t / kSecondsPerMinute) % 60) + ":" + two(t % 60);
  return neg ? "-" + out : out;
}

}  // namespace delaysim
