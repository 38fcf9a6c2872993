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

#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "mzphase/phase_grid.hpp"
#include "mzphase/photon_model.hpp"

namespace mzphase {

/// Probability density over phi in [0, pi], stored on a PhaseGrid both as a
/// normalized log density and as the density itself.
class Posterior {
 public:
  /// Normalizes an unnormalized log density (entries may be -inf) so the
  /// trapezoidal integral is 1. Throws DegenerateEvidenceError when every
  /// node is -inf or the evidence is not finite.
  static Posterior from_log_density(const PhaseGrid& grid,
                                    std::vector<double> log_unnormalized);

  /// Flat prior 1/pi.
  static Posterior uniform(const PhaseGrid& grid);

  const PhaseGrid& grid() const noexcept { return grid_; }
  std::span<const double> log_density() const noexcept { return log_density_; }
  std::span<const double> density() const noexcept { return density_; }

 private:
  Posterior(PhaseGrid grid, std::vector<double> log_density,
            std::vector<double> density);

  PhaseGrid grid_;
  std::vector<double> log_density_;
  std::vector<double> density_;
};

/// Normalizing constant of cos^{2Nc}(phi/2) sin^{2Nd}(phi/2) over [0, pi]:
/// Gamma(1 + Nc + Nd) / (Gamma(1/2 + Nc) Gamma(1/2 + Nd)).
double normalization_constant(Outcome outcome);
double log_normalization_constant(Outcome outcome);

/// Closed-form single-pulse posterior under a flat prior for an ideal
/// interferometer. Does not depend on the mean photon number.
std::vector<double> single_shot_log_density(Outcome outcome,
                                            const PhaseGrid& grid);
Posterior single_shot_posterior(Outcome outcome, const PhaseGrid& grid);

/// Per-pulse posterior shape used by accumulate(). Only the phi dependence
/// matters; constants are removed by the final normalization.
class ShotPosteriorSource {
 public:
  virtual ~ShotPosteriorSource() = default;
  virtual std::vector<double> log_density(Outcome outcome,
                                          const PhaseGrid& grid) const = 0;
};

class IdealShotPosterior final : public ShotPosteriorSource {
 public:
  std::vector<double> log_density(Outcome outcome,
                                  const PhaseGrid& grid) const override {
    return single_shot_log_density(outcome, grid);
  }
};

/// Memoizes per-outcome log densities on one grid. Not thread safe; give
/// each worker its own table.
class ShotPosteriorTable {
 public:
  ShotPosteriorTable(const PhaseGrid& grid, const ShotPosteriorSource& source)
      : grid_(grid), source_(&source) {}

  const PhaseGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& operator()(Outcome outcome);

 private:
  PhaseGrid grid_;
  const ShotPosteriorSource* source_;
  std::map<Outcome, std::vector<double>> cache_;
};

/// Multi-pulse posterior: product of per-pulse posteriors, evaluated as a
/// sum of log densities. Identical outcomes are grouped, so the result does
/// not depend on the order of the sequence. An empty sequence gives the
/// flat prior.
Posterior accumulate(std::span<const Outcome> outcomes, const PhaseGrid& grid);
Posterior accumulate(std::span<const Outcome> outcomes,
                     ShotPosteriorTable& table);

/// Counts of each distinct outcome, ordered by outcome.
std::map<Outcome, std::uint64_t> histogram(std::span<const Outcome> outcomes);

/// Posterior mean by trapezoidal quadrature.
double posterior_mean(const Posterior& post);

struct CredibleInterval {
  double lower;
  double upper;
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

/// Interval around the posterior mean holding `level` of the mass, level/2
/// on each side. When one side runs into 0 or pi, the missing mass is taken
/// from the other side.
CredibleInterval credible_bounds(const Posterior& post, double level = 0.6827);

/// Half-width of credible_bounds(); the reported phase uncertainty.
double credible_interval(const Posterior& post, double level = 0.6827);

/// CSV `phi,density` with phi in units of pi and density per radian.
void write_posterior_csv(std::ostream& out, const Posterior& post);

}  // namespace mzphase
