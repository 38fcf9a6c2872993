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
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mzphase/phase_grid.hpp"
#include "mzphase/photon_model.hpp"
#include "mzphase/posterior.hpp"
#include "mzphase/random.hpp"

namespace mzphase {

/// Square matrix indexed [reported][true]; columns are distributions.
using ChannelMatrix = std::vector<std::vector<double>>;

/// Independent misread channels for the two photon-number-resolving
/// detectors. Counts 0..n_max can be reported; a true count above n_max
/// behaves like n_max.
class ConfusionModel {
 public:
  static constexpr std::uint32_t kDefaultMaxCount = 4;

  /// Validates shape, entries in [0, 1] and column sums within 1e-9, then
  /// renormalizes columns exactly.
  ConfusionModel(std::uint32_t n_max, ChannelMatrix forward_c,
                 ChannelMatrix forward_d);

  static ConfusionModel identity(std::uint32_t n_max = kDefaultMaxCount);

  /// Same channel on both ports.
  static ConfusionModel symmetric(std::uint32_t n_max, const ChannelMatrix& k);

  std::uint32_t n_max() const noexcept { return n_max_; }
  const ChannelMatrix& forward_c() const noexcept { return forward_c_; }
  const ChannelMatrix& forward_d() const noexcept { return forward_d_; }

  /// K_c[reported | true]; true counts above n_max are folded.
  double port_c(std::uint32_t reported, std::uint32_t true_count) const;
  double port_d(std::uint32_t reported, std::uint32_t true_count) const;

  bool is_identity() const;

 private:
  std::uint32_t n_max_;
  ChannelMatrix forward_c_;
  ChannelMatrix forward_d_;
};

/// Passes a true outcome through the misread channel.
Outcome apply_noise(Outcome true_outcome, const ConfusionModel& model,
                    RandomStream& rng);

/// P(measured | phi) = sum over true pairs of K_c K_d P_ideal(true | phi).
/// True counts run to ideal.max_count() on each port.
double noisy_joint_likelihood(double phi, Outcome measured,
                              const ConfusionModel& model,
                              const InterferometerModel& ideal);

class NoisyLikelihood final : public ShotLikelihood {
 public:
  NoisyLikelihood(ConfusionModel model, InterferometerModel ideal)
      : model_(std::move(model)), ideal_(ideal) {}

  double probability(double phi, Outcome outcome) const override {
    return noisy_joint_likelihood(phi, outcome, model_, ideal_);
  }
  std::uint32_t max_count() const override { return model_.n_max(); }

  /// Evaluates each port's reported-count distribution once per phi.
  double log_likelihood_sum(const std::map<Outcome, std::uint64_t>& counts,
                            double phi) const override;

  const ConfusionModel& model() const noexcept { return model_; }
  const InterferometerModel& ideal() const noexcept { return ideal_; }

 private:
  ConfusionModel model_;
  InterferometerModel ideal_;
};

/// Joint count histograms recorded at known phases.
struct CalibrationData {
  double nbar = 0.0;
  std::uint32_t n_max = ConfusionModel::kDefaultMaxCount;
  std::vector<double> phases;
  /// counts[j][n_c * (n_max + 1) + n_d]
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t index(Outcome o) const noexcept {
    return static_cast<std::size_t>(o.n_c) * (n_max + 1) + o.n_d;
  }
  std::uint64_t count(std::size_t phase_index, Outcome o) const {
    return counts.at(phase_index).at(index(o));
  }
  std::uint64_t pulses(std::size_t phase_index) const;
  /// Total occurrences of `o` over all phases.
  std::uint64_t observed(Outcome o) const;
};

/// Simulates `pulses_per_phase` pulses at every phase. Each phase draws from
/// its own stream keyed by (seed, phase index), so the result does not
/// depend on evaluation order. Reported counts are capped at model.n_max().
CalibrationData simulate_calibration(std::span<const double> phases,
                                     std::uint64_t pulses_per_phase,
                                     const ConfusionModel& model,
                                     const InterferometerModel& ideal,
                                     std::uint64_t seed);

/// Empirical P(phi_j | measured) at the calibration phases: relative
/// frequencies inverted with a flat prior. Normalized by trapezoidal
/// integration over the calibration phases, extended flat to 0 and pi.
std::vector<double> empirical_posterior(const CalibrationData& calib,
                                        Outcome measured);

/// Recovers the per-detector channels from the marginal count histograms:
/// each reported-count row is a non-negative least-squares fit against the
/// folded Poisson basis of the port mean, followed by column
/// renormalization. Throws FitError when the basis is rank deficient.
ConfusionModel fit_confusion(const CalibrationData& calib);

/// P(true | measured), the mixing weights of the noisy single-pulse
/// posterior. Indexed by pairs in {0..n_max}^2.
class RetrodictiveWeights {
 public:
  explicit RetrodictiveWeights(std::uint32_t n_max);

  static RetrodictiveWeights identity(std::uint32_t n_max);

  std::uint32_t n_max() const noexcept { return n_max_; }
  std::size_t pair_count() const noexcept { return table_.size(); }
  std::size_t index(Outcome o) const;
  Outcome pair(std::size_t index) const;

  double weight(Outcome measured, Outcome true_pair) const;
  std::span<const double> distribution(Outcome measured) const;

  /// Replaces the row for `measured`; must be non-negative with positive
  /// sum, and is renormalized to 1.
  void set_distribution(Outcome measured, std::vector<double> weights);

  /// Measured pairs that received the uniform fallback distribution.
  const std::vector<Outcome>& fallback_pairs() const noexcept {
    return fallback_;
  }
  void mark_fallback(Outcome measured) { fallback_.push_back(measured); }

 private:
  std::uint32_t n_max_;
  std::vector<std::vector<double>> table_;
  std::vector<Outcome> fallback_;
};

/// Phase-averaged ideal pair probabilities under the flat prior, with true
/// counts folded at n_max. Indexed like RetrodictiveWeights.
std::vector<double> phase_averaged_pair_probabilities(
    double nbar, std::uint32_t n_max, const PhaseGrid& grid);

/// Bayes inversion of a forward channel: w(t | m) proportional to
/// K_c(m_c | t_c) K_d(m_d | t_d) Pbar(t).
RetrodictiveWeights retrodictive_weights(const ConfusionModel& model,
                                         double nbar, const PhaseGrid& grid);

/// Full calibration fit. Measured pairs never seen in the calibration data
/// get uniform weights and are listed in fallback_pairs().
RetrodictiveWeights fit_retrodictive_weights(const CalibrationData& calib,
                                             const PhaseGrid& grid);

/// Mixture of ideal single-pulse posteriors with retrodictive weights.
class FittedShotPosterior final : public ShotPosteriorSource {
 public:
  explicit FittedShotPosterior(RetrodictiveWeights weights)
      : weights_(std::move(weights)) {}

  std::vector<double> log_density(Outcome measured,
                                  const PhaseGrid& grid) const override;
  const RetrodictiveWeights& weights() const noexcept { return weights_; }

 private:
  RetrodictiveWeights weights_;
};

Posterior posterior_fit(Outcome measured, const RetrodictiveWeights& weights,
                        const PhaseGrid& grid);

// Serialization. Angles in CSV files are in units of pi.

nlohmann::json to_json(const ConfusionModel& model);
ConfusionModel confusion_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RetrodictiveWeights& weights);
RetrodictiveWeights weights_from_json(const nlohmann::json& j);

/// `phi,nc,nd,count`, one row per phase and pair.
void write_calibration_csv(std::ostream& out, const CalibrationData& calib);
CalibrationData read_calibration_csv(const std::filesystem::path& path,
                                     double nbar, std::uint32_t n_max);

/// Recorded pulses, `pulse_index,nc,nd`.
OutcomeSequence read_pulse_csv(const std::filesystem::path& path);
void write_pulse_csv(std::ostream& out, std::span<const Outcome> pulses);

/// Builds calibration histograms from one pulse file per known phase
/// (phase in radians). Counts above n_max are folded into n_max.
CalibrationData calibration_from_pulse_files(
    const std::vector<std::pair<double, std::filesystem::path>>& files,
    double nbar, std::uint32_t n_max);

}  // namespace mzphase
