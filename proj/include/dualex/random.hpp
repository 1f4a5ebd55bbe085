/*
 * Copyright 2026 The dualex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/**
 * @file random.hpp
 * @brief Counter-based random source with splittable streams.
 *
 * Every draw is a pure function of (seed, stream, counter):
 *
 *   key      = mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019)
 *   word(i)  = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
 *
 * where mix64 is the SplitMix64 finalizer
 *
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   z =  z ^ (z >> 31)
 *
 * and the counter i starts at 0 and advances by one per 64-bit word. Derived
 * variates consume words in a fixed order so any language reproduces the same
 * sequence:
 *
 *   uniform01     (word >> 11) * 2^-53                   in [0, 1)
 *   uniform_open  ((word >> 11) + 1) * 2^-53             in (0, 1]
 *   exponential   -log(uniform_open)
 *   normal        Box-Muller on (uniform_open, uniform01), one word pair
 *                 per variate: sqrt(-2 log u1) * cos(2 pi u2)
 *   below(n)      Lemire multiply-shift with rejection
 */

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dualex {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream), key_(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  double exponential() noexcept { return -std::log(uniform_open()); }

  double normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  __extension__ typedef unsigned __int128 u128;

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const u128 m = static_cast<u128>(next_u64()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  // Fisher-Yates, walking from the back.
  template <typename Container>
  void shuffle(Container& c) noexcept {
    for (std::size_t i = c.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(c[i - 1], c[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dualex
