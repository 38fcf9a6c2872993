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
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mzphase/detector.hpp"
#include "mzphase/estimators.hpp"
#include "mzphase/photon_model.hpp"
#include "mzphase/random.hpp"

namespace mzphase {

enum class Estimator { bayes, ml, classical, fringe, ymk };

std::string_view to_string(Estimator e);
/// Throws FormatError for unknown names.
Estimator parse_estimator(std::string_view name);

/// Misread channel used to corrupt simulated pulses, together with what a
/// calibration fit recovered from it.
struct NoiseSetup {
  ConfusionModel channel;
  RetrodictiveWeights weights;
  /// Channel recovered by the calibration fit; drives ML and F_fit.
  ConfusionModel fitted_channel;
};

/// theta / pi in {0.05, 0.10, ..., 0.95}, in radians.
std::vector<double> default_theta_grid();

struct ExperimentPlan {
  double nbar = 1.08;
  std::vector<double> theta_grid = default_theta_grid();
  std::uint32_t shots = 1000;
  std::uint32_t replicas = 150;
  std::uint64_t seed = 0;
  std::vector<Estimator> estimators = {Estimator::bayes};
  std::size_t grid_points = 4096;
  double level = 0.6827;
  std::optional<NoiseSetup> noise;
  /// Fringe used by the fringe-inverted estimator; ideal fringe
  /// (a = 0, b = 0, amplitude = nbar) when unset.
  std::optional<FringeParams> fringe;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws DomainError on an invalid plan.
  void validate() const;
};

struct EstimateRecord {
  double estimate;
  /// Reported uncertainty: credible half-width (bayes), CRLB at the
  /// estimate (ml), error propagation at the estimate (classical: ideal
  /// fringe and Poisson spread; fringe: fitted fringe and observed spread),
  /// 1/sqrt(total photons) (ymk). NaN where undefined.
  double delta;
};

/// One replica: records aligned with plan.estimators.
using EstimationResult = std::vector<EstimateRecord>;

/// Per-estimation workspace: caches per-outcome posterior shapes and
/// likelihood models. One per worker thread.
class EstimationContext {
 public:
  explicit EstimationContext(const ExperimentPlan& plan);
  ~EstimationContext();
  EstimationContext(const EstimationContext&) = delete;
  EstimationContext& operator=(const EstimationContext&) = delete;

  /// Simulates plan.shots pulses at theta (noise applied when configured)
  /// and evaluates every estimator in the plan.
  EstimationResult run(double theta, RandomStream& rng);

  /// Estimators on an already recorded sequence.
  EstimationResult evaluate(std::span<const Outcome> outcomes);

  /// Posterior of a recorded sequence (fitted weights when noisy).
  Posterior posterior(std::span<const Outcome> outcomes);

  OutcomeSequence simulate(double theta, RandomStream& rng) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Single estimation with a fresh context; bayes must be in the plan.
/// Returns (posterior mean, credible half-width).
std::pair<double, double> run_estimation(double theta,
                                         const ExperimentPlan& plan,
                                         RandomStream& rng);

struct ScanRecord {
  double theta;
  Estimator estimator;
  double mean_est;
  double bias;  // mean_est - theta
  double mean_dtheta;
  double sd_est;
  double sd_dtheta;
  std::size_t replicas;
  /// Fewer than two replicas: spreads undefined.
  bool degenerate;
  /// |bias| < 3 sd_est / sqrt(replicas).
  bool unbiased;
};

struct ReferenceRecord {
  double theta;
  double crlb_ideal;    // 1 / sqrt(p nbar)
  double crlb_fit;      // 1 / sqrt(p F_fit(theta)); NaN without noise
  double classical;     // 1 / (sqrt(p nbar) sin theta)
};

struct ScanResult {
  std::string kind;
  ExperimentPlan plan;
  std::vector<ScanRecord> records;
  std::vector<ReferenceRecord> reference;
  /// samples[phase][replica][estimator]
  std::vector<std::vector<EstimationResult>> samples;

  const ScanRecord& record(std::size_t phase_index, Estimator e) const;
};

/// Runs every (phase, replica) estimation. Replica r at phase j uses
/// stream_for(plan.seed, j, r), so results are independent of threading.
ScanResult run_scan(const ExperimentPlan& plan);

/// run_scan plus the unbiasedness summary.
ScanResult bias_scan(const ExperimentPlan& plan);

/// run_scan plus reference bound curves.
ScanResult sensitivity_scan(const ExperimentPlan& plan);

/// `theta,estimator,mean_est,bias,mean_dtheta,sd_est,sd_dtheta`; theta and
/// mean_est in units of pi, the rest in radians.
void write_scan_csv(std::ostream& out, const ScanResult& result);

/// `theta,estimator,sqrtp_dtheta,sqrtp_dtheta_sd,sqrtp_crlb,sqrtp_crlb_fit,
/// sqrtp_classical`; sqrt(p)-scaled uncertainties next to the bound curves.
void write_sensitivity_csv(std::ostream& out, const ScanResult& result);

nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// Plan echo, seed, library version.
nlohmann::json run_manifest(const ScanResult& result);

std::string_view library_version();

}  // namespace mzphase
