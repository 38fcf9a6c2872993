// Copyright 2026 The mzphase Authors
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

#include <cstdint>
#include <random>

namespace mzphase {

/// 64-bit finalizer from SplitMix64; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source. Uniform and Poisson variates are produced
/// from the raw 64-bit engine output without going through the
/// implementation-defined std distributions, so streams are reproducible
/// across standard libraries for the small means used here.
class RandomStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Poisson variate. Sequential inversion for mean < 30, otherwise
  /// std::poisson_distribution.
  std::uint32_t poisson(double mean);

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

/// Independent stream keyed by (seed, a, b); e.g. a = phase index,
/// b = replica index. Identical keys always give identical streams.
RandomStream stream_for(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace mzphase
