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

#include <span>

#include "mzphase/detector.hpp"
#include "mzphase/phase_grid.hpp"
#include "mzphase/photon_model.hpp"

namespace mzphase {

/// Average photon-number difference M_p = sum (N_c - N_d) / p.
double mean_difference(std::span<const Outcome> outcomes);

/// arccos(M_p / nbar), argument clamped to [-1, 1].
double classical_estimate(std::span<const Outcome> outcomes, double nbar);

/// Linear error propagation: 1 / (sqrt(p nbar) sin theta). Throws
/// DomainError at theta = 0 or pi where it diverges.
double classical_uncertainty(double theta, double nbar, std::uint64_t p);

/// Fringe M(theta) = amplitude cos(offset_phase + theta) + offset_counts.
struct FringeParams {
  double offset_phase = 0.0;
  double offset_counts = 0.0;
  double amplitude = 1.0;
};

struct FringeFit {
  FringeParams params;
  double se_offset_phase = 0.0;
  double se_offset_counts = 0.0;
  double se_amplitude = 0.0;
  double residual_rms = 0.0;
};

/// Mean photon-number difference observed at a known phase.
struct FringePoint {
  double phase;
  double mean_difference;
};

/// Linear least squares in (amplitude cos a, -amplitude sin a, b). Needs at
/// least three distinct phases; throws FitError otherwise, or when the
/// fitted amplitude is not significantly above zero.
FringeFit fit_fringe(std::span<const FringePoint> points);
FringeFit fit_fringe(const CalibrationData& calib);

/// arccos(clamp((M_p - b) / amplitude)) - a, reflected into [0, pi].
double noisy_classical_estimate(std::span<const Outcome> outcomes,
                                const FringeParams& params);

/// arccos((N_c - N_d) / (N_c + N_d)). Throws DomainError when no photon was
/// detected.
double ymk_estimate(Outcome outcome);

/// YMK applied to the pooled counts of a sequence; pulses without photons
/// contribute nothing. Throws DomainError when the whole sequence is empty
/// of photons.
double ymk_estimate(std::span<const Outcome> outcomes);

struct MlEstimate {
  double phase;
  /// Log-likelihood constant over the grid; phase is then pi/2.
  bool flat = false;
};

/// Grid argmax of the summed log-likelihood (ties go to the smaller phase),
/// refined by golden-section search over the neighbouring grid cells.
MlEstimate ml_estimate(std::span<const Outcome> outcomes,
                       const ShotLikelihood& model, const PhaseGrid& grid);

}  // namespace mzphase
