// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace delaysim::stats {

// Lower of the two middle values for even sizes. Empty input gives 0.
inline double median(std::span<double const> values) {
  if (values.empty()) return 0;
  std::vector<double> v(values.begin(), values.end());
  auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline double mean(std::span<double const> values) {
  if (values.empty()) return 0;
  double s = 0;
  for (double x : values) s += x;
  return s / static_cast<double>(values.size());
}

// Population standard deviation. Integral inputs (whole seconds) take an
// exact integer path so that equal spreads compare equal; sort ties then
// fall through to the case id instead of rounding noise.
inline double std_dev(std::span<double const> values) {
  if (values.size() < 2) return 0;
  constexpr double kExactLimit = 1 << 30;
  bool integral = values.size() < (std::size_t{1} << 30) &&
                  std::all_of(values.begin(), values.end(), [](double x) {
                    return std::abs(x) <= kExactLimit && x == std::floor(x);
                  });
  if (integral) {
    __int128 sum = 0, sum_sq = 0;
    for (double x : values) {
      auto v = static_cast<__int128>(static_cast<std::int64_t>(x));
      sum += v;
      sum_sq += v * v;
    }
    auto n = static_cast<__int128>(values.size());
    auto scaled = n * sum_sq - sum * sum;  // n^2 * variance
    return std::sqrt(static_cast<double>(scaled)) / static_cast<double>(values.size());
  }
  double m = mean(values);
  double ss = 0;
  for (double x : values) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

// 1-based nearest rank k = ceil(p/100 * n), clamped to [1, n].
inline std::size_t nearest_rank_index(double percentile, std::size_t n) {
  if (!(percentile > 0 && percentile <= 100)) {
    throw std::invalid_argument("percentile must lie in (0, 100]");
  }
  auto k = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

inline double nearest_rank(std::span<double const> values, double percentile) {
  if (values.empty()) return 0;
  std::vector<double> v(values.begin(), values.end());
  auto k = nearest_rank_index(percentile, v.size());
  auto it = v.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(v.begin(), it, v.end());
  return *it;
}

struct Summary {
  double median = 0;
  double mean = 0;
  double std_dev = 0;
  double p80 = 0;

  bool operator==(Summary const&) const = default;
};

inline Summary summarize(std::span<double const> values) {
  return {median(values), mean(values), std_dev(values), nearest_rank(values, 80)};
}

}  // namespace delaysim::stats
