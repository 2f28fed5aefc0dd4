// Copyright 2026, radar-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace radar_forge {

/// PCG64 (XSL-RR 128/64): 128-bit LCG state with a permuted 64-bit output.
/// Everything here is integer arithmetic plus one exact 53-bit scaling, so a
/// (seed, stream) pair yields the same sequence on every platform.
///
/// Not thread-safe; give each worker its own instance (see `for_frame`).
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "pcg64-xsl-rr-128/64";

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    increment_ = (static_cast<u128>(stream) << 1u) | 1u;
    state_ = 0;
    step();
    state_ += seed;
    step();
  }

  /// Independent generator for one frame: seed xor frame index.
  static SeededRng for_frame(std::uint64_t seed, std::uint64_t frame_index, std::uint64_t stream = 0) {
    return SeededRng(seed ^ frame_index, stream);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() {
    step();
    const auto hi = static_cast<std::uint64_t>(state_ >> 64u);
    const auto lo = static_cast<std::uint64_t>(state_);
    const auto rot = static_cast<int>(state_ >> 122u);
    return std::rotr(hi ^ lo, rot);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Normal variate by Box-Muller (uses two uniforms per call).
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  using u128 = unsigned __int128;

  void step() {
    static constexpr u128 kMultiplier =
        (static_cast<u128>(0x2360ED051FC65DA4ull) << 64u) | static_cast<u128>(0x4385DF649FCCF645ull);
    state_ = state_ * kMultiplier + increment_;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  u128 state_;
  u128 increment_;
};

}  // namespace radar_forge

