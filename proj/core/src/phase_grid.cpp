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

#include "mzphase/phase_grid.hpp"

#include <numbers>

#include "mzphase/errors.hpp"

namespace mzphase {

PhaseGrid::PhaseGrid(std::size_t n_points) {
  if (n_points < 2) throw DomainError("phase grid needs at least 2 points");
  spacing_ = std::numbers::pi / static_cast<double>(n_points - 1);
  nodes_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    nodes_[i] = spacing_ * static_cast<double>(i);
  }
  nodes_.back() = std::numbers::pi;
}

double PhaseGrid::integrate(std::span<const double> values) const {
  if (values.size() != nodes_.size()) {
    throw DomainError("value count does not match grid size");
  }
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * spacing_;
}

std::vector<double> PhaseGrid::cumulative(std::span<const double> values) const {
  if (values.size() != nodes_.size()) {
    throw DomainError("value count does not match grid size");
  }
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * spacing_ * (values[i - 1] + values[i]);
  }
  return out;
}

}  // namespace mzphase
