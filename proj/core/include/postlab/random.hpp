// Copyright 2026 The postlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace postlab {

/// Deterministic counter-based random stream.
///
/// Draw i is a pure function of (seed, i): the generator hashes
/// seed + (i+1) * 0x9E3779B97F4A7C15 through the SplitMix64 finalizer
/// (Steele, Lea & Flood; constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).
/// Equal seeds therefore give bit-identical integer and uniform sequences
/// on every platform. normal() is built from two uniforms via Box-Muller
/// and inherits the accuracy of the platform's libm.
///
/// A stream is a single-consumer value: give each logical worker its own
/// stream, usually via substream().
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    counter_ += 1;
    std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate. Consumes exactly two draws.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    // 1 - u1 lies in (0, 1], so the log is finite.
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Unbiased integer in [0, n). Rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::below: n must be positive");
    const std::uint64_t rem =
        (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (rem == 0 || x < std::uint64_t(0) - rem) return x % n;
    }
  }

  /// Independent stream for the worker with the given index, derived as
  /// seed XOR index. The parent stream is left untouched.
  RandomStream substream(std::uint64_t index) const { return RandomStream(seed_ ^ index); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace postlab
