// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace delaysim {

// Stable, platform-independent random streams.
//
// Every random quantity is drawn from its own stream whose seed is
//
//   key = f(f(f(f(f(master_seed) ^ stream) ^ run_index) ^ fnv1a64(train_id))
//           ^ stop_index)
//
// where f is the SplitMix64 finalizer. The stream then yields SplitMix64
// outputs. Draws therefore depend only on those five values and never on the
// order in which the simulator visits trains.

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

enum class DrawStream : std::uint64_t {
  primary_delay = 1,
  runtime_jitter = 2,
};

inline constexpr std::uint64_t draw_key(std::uint64_t master_seed,
                                        DrawStream stream,
                                        std::uint64_t run_index,
                                        std::string_view train_id,
                                        std::uint64_t stop_index) noexcept {
  std::uint64_t h = splitmix64_mix(master_seed);
  h = splitmix64_mix(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64_mix(h ^ run_index);
  h = splitmix64_mix(h ^ fnv1a64(train_id));
  h = splitmix64_mix(h ^ stop_index);
  return h;
}

class SplitMix64 {
public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace delaysim
