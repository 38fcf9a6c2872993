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

#include "mzphase/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "mzphase/errors.hpp"
#include "test_support.hpp"

using namespace mzphase;
using mzphase::testing::kPi;

TEST(Classical, MeanDifference) {
  const std::vector<Outcome> shots{{2, 0}, {0, 1}, {1, 1}, {3, 0}};
  EXPECT_DOUBLE_EQ(mean_difference(shots), 1.0);
  EXPECT_THROW(mean_difference(std::vector<Outcome>{}), DomainError);
}

TEST(Classical, EstimateExamples) {
  const std::vector<Outcome> balanced{{1, 0}, {0, 1}};
  EXPECT_NEAR(classical_estimate(balanced, 1.08), kPi / 2, 1e-15);
  const std::vector<Outcome> bright{{1, 0}};
  EXPECT_NEAR(classical_estimate(bright, 1.0), 0.0, 1e-15);
}

TEST(Classical, EstimateClampsOutOfRangeDifferences) {
  const std::vector<Outcome> high{{5, 0}};
  const std::vector<Outcome> low{{0, 5}};
  EXPECT_EQ(classical_estimate(high, 1.08), 0.0);
  EXPECT_NEAR(classical_estimate(low, 1.08), kPi, 1e-15);
  EXPECT_THROW(classical_estimate(high, 0.0), DomainError);
}

TEST(Classical, Uncertainty) {
  EXPECT_NEAR(classical_uncertainty(kPi / 2, 1.08, 1000),
              1.0 / std::sqrt(1080.0), 1e-15);
  EXPECT_THROW(classical_uncertainty(0.0, 1.08, 10), DomainError);
  EXPECT_THROW(classical_uncertainty(kPi, 1.08, 10), DomainError);
  EXPECT_THROW(classical_uncertainty(1.0, 1.08, 0), DomainError);
}

TEST(Fringe, RecoversParametersFromExactPoints) {
  const FringeParams truth{0.3, -0.05, 0.9};
  std::vector<FringePoint> points;
  for (int k = 1; k <= 19; ++k) {
    const double phi = kPi * k / 20;
    points.push_back(
        {phi, truth.amplitude * std::cos(phi + truth.offset_phase) +
                  truth.offset_counts});
  }
  const auto fit = fit_fringe(points);
  EXPECT_NEAR(fit.params.amplitude, 0.9, 1e-12);
  EXPECT_NEAR(fit.params.offset_phase, 0.3, 1e-12);
  EXPECT_NEAR(fit.params.offset_counts, -0.05, 1e-12);
  EXPECT_LT(fit.residual_rms, 1e-12);
}

TEST(Fringe, StandardErrorsCoverNoisyPoints) {
  RandomStream rng(11);
  std::vector<FringePoint> points;
  for (int k = 1; k <= 19; ++k) {
    const double phi = kPi * k / 20;
    // Roughly unit-variance noise scaled to 0.01.
    const double noise = 0.01 * (rng.uniform() + rng.uniform() + rng.uniform() +
                                 rng.uniform() - 2.0) * std::sqrt(3.0);
    points.push_back({phi, 1.08 * std::cos(phi) + noise});
  }
  const auto fit = fit_fringe(points);
  EXPECT_GT(fit.se_amplitude, 0.0);
  EXPECT_LT(std::abs(fit.params.amplitude - 1.08), 4 * fit.se_amplitude);
  EXPECT_LT(std::abs(fit.params.offset_phase), 4 * fit.se_offset_phase);
  EXPECT_LT(std::abs(fit.params.offset_counts), 4 * fit.se_offset_counts);
}

TEST(Fringe, DegenerateInputsFail) {
  const std::vector<FringePoint> two{{0.1, 1.0}, {0.2, 0.9}};
  EXPECT_THROW(fit_fringe(two), FitError);
  const std::vector<FringePoint> repeated{{0.1, 1.0}, {0.1, 1.0}, {0.2, 0.9},
                                          {0.2, 0.9}};
  EXPECT_THROW(fit_fringe(repeated), FitError);
  std::vector<FringePoint> flat;
  for (int k = 1; k <= 9; ++k) flat.push_back({0.3 * k, 0.25});
  EXPECT_THROW(fit_fringe(flat), FitError);
}

TEST(Fringe, NoisyClassicalInvertsFringe) {
  const FringeParams params{0.2, 0.1, 0.8};
  const double theta = 1.1;
  const double d = params.amplitude * std::cos(theta + params.offset_phase) +
                   params.offset_counts;
  // Build outcomes whose mean difference is d: fractional via many pulses.
  const int pulses = 1000;
  const int diff_total = static_cast<int>(std::lround(d * pulses));
  std::vector<Outcome> shots(pulses, Outcome{0, 0});
  for (int i = 0; i < std::abs(diff_total); ++i) {
    shots[static_cast<std::size_t>(i)] = diff_total > 0 ? Outcome{1, 0} : Outcome{0, 1};
  }
  EXPECT_NEAR(noisy_classical_estimate(shots, params), theta, 2e-3);
  EXPECT_THROW(noisy_classical_estimate(shots, FringeParams{0.0, 0.0, 0.0}),
               DomainError);
}

TEST(Ymk, SinglePulse) {
  EXPECT_NEAR(ymk_estimate(Outcome{1, 0}), 0.0, 1e-15);
  EXPECT_NEAR(ymk_estimate(Outcome{0, 1}), kPi, 1e-15);
  EXPECT_NEAR(ymk_estimate(Outcome{1, 1}), kPi / 2, 1e-15);
  EXPECT_NEAR(ymk_estimate(Outcome{2, 1}), std::acos(1.0 / 3.0), 1e-15);
  EXPECT_THROW(ymk_estimate(Outcome{0, 0}), DomainError);
}

TEST(Ymk, PoolsCountsAcrossPulses) {
  const std::vector<Outcome> shots{{1, 0}, {0, 0}, {0, 1}, {1, 0}};
  EXPECT_NEAR(ymk_estimate(shots), std::acos(1.0 / 3.0), 1e-15);
  const std::vector<Outcome> dark{{0, 0}, {0, 0}};
  EXPECT_THROW(ymk_estimate(dark), DomainError);
}

TEST(MaximumLikelihood, AnalyticValues) {
  const InterferometerModel model(1.08);
  const PhaseGrid grid;
  const struct {
    Outcome o;
    double expected;
  } cases[] = {
      {{2, 1}, 1.23095941734077},
      {{1, 3}, 2.0943951023932},
      {{3, 1}, kPi / 3},
      {{5, 2}, 1.12788528272126},
      {{1, 0}, 0.0},
      {{0, 1}, kPi},
      {{0, 4}, kPi},
      {{2, 2}, kPi / 2},
  };
  for (const auto& c : cases) {
    const std::vector<Outcome> shots{c.o};
    const auto est = ml_estimate(shots, model, grid);
    EXPECT_FALSE(est.flat);
    EXPECT_NEAR(est.phase, c.expected, 1e-7) << c.o.n_c << "," << c.o.n_d;
  }
}

TEST(MaximumLikelihood, AgreesWithYmkOnIdealData) {
  const InterferometerModel model(1.08);
  const PhaseGrid grid;
  for (unsigned total = 1; total <= 8; ++total) {
    for (unsigned nc = 0; nc <= total; ++nc) {
      const Outcome o{nc, total - nc};
      const std::vector<Outcome> shots{o};
      EXPECT_NEAR(ml_estimate(shots, model, grid).phase, ymk_estimate(o),
                  2 * grid.spacing());
    }
  }
}

TEST(MaximumLikelihood, FlatLikelihood) {
  const InterferometerModel model(1.08);
  const std::vector<Outcome> dark{{0, 0}, {0, 0}, {0, 0}};
  const auto est = ml_estimate(dark, model, PhaseGrid());
  EXPECT_TRUE(est.flat);
  EXPECT_EQ(est.phase, kPi / 2);
  EXPECT_THROW(ml_estimate(std::vector<Outcome>{}, model, PhaseGrid()),
               DomainError);
}

TEST(MaximumLikelihood, OrderInvariant) {
  const InterferometerModel model(1.08);
  std::vector<Outcome> shots{{1, 0}, {0, 1}, {0, 0}, {2, 0}, {1, 1}};
  const double a = ml_estimate(shots, model, PhaseGrid()).phase;
  std::reverse(shots.begin(), shots.end());
  EXPECT_EQ(ml_estimate(shots, model, PhaseGrid()).phase, a);
}
