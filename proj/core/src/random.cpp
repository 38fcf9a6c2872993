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

#include "mzphase/random.hpp"

#include <cmath>

namespace mzphase {

std::uint32_t RandomStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean >= 30.0) {
    std::poisson_distribution<std::uint32_t> dist(mean);
    return dist(engine_);
  }
  const double u = uniform();
  double term = std::exp(-mean);
  double cdf = term;
  std::uint32_t k = 0;
  while (u >= cdf && k < 200) {
    ++k;
    term *= mean / static_cast<double>(k);
    cdf += term;
  }
  return k;
}

RandomStream stream_for(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t key = mix64(seed);
  key = mix64(key ^ mix64(a + 0x632be59bd9b4e019ULL));
  key = mix64(key ^ mix64(b + 0x8cb92ba72f3d8dd7ULL));
  return RandomStream(key);
}

}  // namespace mzphase
