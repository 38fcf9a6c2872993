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

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "mzphase/random.hpp"

namespace mzphase {

/// Photon counts recorded at output ports c and d for one pulse.
struct Outcome {
  std::uint32_t n_c = 0;
  std::uint32_t n_d = 0;

  std::uint32_t total() const noexcept { return n_c + n_d; }
  friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

/// p independent pulses making up one phase estimation.
using OutcomeSequence = std::vector<Outcome>;

/// Anything that can report P(N_c, N_d | phi) for phi in [0, pi]. Outcome
/// sums (Fisher information) run over counts 0..max_count() per port.
class ShotLikelihood {
 public:
  virtual ~ShotLikelihood() = default;
  virtual double probability(double phi, Outcome outcome) const = 0;
  virtual std::uint32_t max_count() const = 0;

  /// sum_k count_k log P(outcome_k | phi), up to a phi-independent constant.
  /// -inf when any observed outcome is impossible at phi.
  virtual double log_likelihood_sum(
      const std::map<Outcome, std::uint64_t>& counts, double phi) const;
};

/// Mean output intensities of a lossless Mach-Zehnder interferometer.
struct OutputMeans {
  double mu_c;
  double mu_d;
};

/// Throws DomainError unless 0 <= phi <= pi.
void require_phase(double phi);

/// Poisson pmf; mean == 0 is allowed (all mass at k = 0).
double poisson_pmf(std::uint32_t k, double mean);

/// Coherent state (mean nbar detected photons, losses folded in) in port a,
/// vacuum in port b. The two output ports then carry independent coherent
/// states, so the joint count distribution is a product of Poissons.
class InterferometerModel final : public ShotLikelihood {
 public:
  static constexpr std::uint32_t kDefaultMaxCount = 25;

  explicit InterferometerModel(double nbar,
                               std::uint32_t n_max = kDefaultMaxCount);

  double nbar() const noexcept { return nbar_; }
  std::uint32_t max_count() const override { return n_max_; }

  /// mu_c = nbar cos^2(phi/2), mu_d = nbar sin^2(phi/2).
  OutputMeans output_means(double phi) const;

  double probability(double phi, Outcome outcome) const override;

  /// Uses the sufficient statistics sum N_c, sum N_d; drops the
  /// phi-independent factorial terms.
  double log_likelihood_sum(const std::map<Outcome, std::uint64_t>& counts,
                            double phi) const override;

  /// Draws one pulse. Counts are not truncated at n_max.
  Outcome sample(double phi, RandomStream& rng) const;

  /// Sum of probability() over {0..n_max}^2.
  double truncated_mass(double phi) const;

 private:
  double nbar_;
  std::uint32_t n_max_;
};

}  // namespace mzphase
