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
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mzphase/photon_model.hpp"

namespace mzphase {

/// Fisher information of the ideal coherent x vacuum interferometer with
/// photon counting: nbar, for every phase.
double fisher_ideal(double nbar);

struct FisherOptions {
  /// Central-difference step in radians.
  double d_theta = 1e-5;
  /// Per-port count cutoff; defaults to the model's max_count().
  std::optional<std::uint32_t> n_max;
  /// Outcomes with P below this are left out of the sum.
  double skip_below = 1e-15;
};

/// dP(outcome | theta)/dtheta by central differences; `order` 2 uses the
/// 3-point stencil, 4 the 5-point stencil.
double probability_derivative(const ShotLikelihood& model, double theta,
                              Outcome outcome, double d_theta, int order = 2);

/// F(theta) = sum over outcomes of (dP/dtheta)^2 / P. theta must lie in the
/// open interval with theta -/+ d_theta still inside [0, pi].
double fisher_numeric(const ShotLikelihood& model, double theta,
                      const FisherOptions& options = {});

/// 1 / sqrt(p F).
double crlb(double fisher, std::uint64_t p);

struct FisherPoint {
  double theta;
  double fisher;
  double crlb;
};

std::vector<FisherPoint> fisher_curve(const ShotLikelihood& model,
                                      std::span<const double> thetas,
                                      std::uint64_t p,
                                      const FisherOptions& options = {});

/// CSV `theta,fisher,crlb`, theta in units of pi.
void write_fisher_csv(std::ostream& out, std::span<const FisherPoint> curve);

}  // namespace mzphase
