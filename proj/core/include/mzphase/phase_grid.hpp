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

#include <cstddef>
#include <span>
#include <vector>

namespace mzphase {

/// Uniform grid over [0, pi] including both endpoints.
class PhaseGrid {
 public:
  static constexpr std::size_t kDefaultPoints = 4096;

  explicit PhaseGrid(std::size_t n_points = kDefaultPoints);

  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return spacing_; }
  double operator[](std::size_t i) const noexcept { return nodes_[i]; }
  std::span<const double> nodes() const noexcept { return nodes_; }

  /// Trapezoidal integral of values sampled at the nodes.
  double integrate(std::span<const double> values) const;

  /// Running trapezoidal integral; result[0] = 0.
  std::vector<double> cumulative(std::span<const double> values) const;

  friend bool operator==(const PhaseGrid& a, const PhaseGrid& b) noexcept {
    return a.nodes_.size() == b.nodes_.size();
  }

 private:
  std::vector<double> nodes_;
  double spacing_;
};

}  // namespace mzphase
