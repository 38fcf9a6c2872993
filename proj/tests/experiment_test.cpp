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

#include "mzphase/experiment.hpp"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "mzphase/errors.hpp"
#include "mzphase/fisher.hpp"
#include "test_support.hpp"

using namespace mzphase;
using mzphase::testing::kPi;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.theta_grid = {0.25 * kPi, 0.5 * kPi};
  plan.shots = 200;
  plan.replicas = 20;
  plan.seed = 31;
  plan.estimators = {Estimator::bayes, Estimator::ml, Estimator::classical,
                     Estimator::ymk};
  plan.grid_points = 1024;
  return plan;
}

std::string scan_csv(const ScanResult& r) {
  std::ostringstream out;
  write_scan_csv(out, r);
  return out.str();
}

}  // namespace

TEST(Estimator, NamesRoundTrip) {
  for (auto e : {Estimator::bayes, Estimator::ml, Estimator::classical,
                 Estimator::fringe, Estimator::ymk}) {
    EXPECT_EQ(parse_estimator(to_string(e)), e);
  }
  EXPECT_THROW(parse_estimator("median"), FormatError);
}

TEST(Plan, Validation) {
  ExperimentPlan plan;
  EXPECT_NO_THROW(plan.validate());
  EXPECT_EQ(plan.theta_grid.size(), 19u);
  EXPECT_NEAR(plan.theta_grid.front(), 0.05 * kPi, 1e-15);
  EXPECT_NEAR(plan.theta_grid.back(), 0.95 * kPi, 1e-15);
  plan.shots = 0;
  EXPECT_THROW(plan.validate(), DomainError);
  plan = ExperimentPlan{};
  plan.theta_grid = {-0.1};
  EXPECT_THROW(plan.validate(), DomainError);
  plan = ExperimentPlan{};
  plan.level = 1.0;
  EXPECT_THROW(plan.validate(), DomainError);
  plan = ExperimentPlan{};
  plan.estimators.clear();
  EXPECT_THROW(plan.validate(), DomainError);
}

TEST(Scan, DeterministicForSeedAndThreadCount) {
  auto plan = small_plan();
  plan.threads = 1;
  const auto a = scan_csv(bias_scan(plan));
  plan.threads = 3;
  const auto b = scan_csv(bias_scan(plan));
  EXPECT_EQ(a, b);
  plan.seed = 32;
  EXPECT_NE(scan_csv(bias_scan(plan)), a);
}

TEST(Scan, SingleReplicaIsDegenerate) {
  auto plan = small_plan();
  plan.replicas = 1;
  const auto r = bias_scan(plan);
  for (const auto& rec : r.records) {
    EXPECT_TRUE(rec.degenerate);
    EXPECT_FALSE(rec.unbiased);
    EXPECT_EQ(rec.replicas, 1u);
  }
}

TEST(Scan, SinglePulseWidthStaysBelowPriorWidth) {
  ExperimentPlan plan;
  plan.theta_grid = {0.24 * kPi};
  plan.shots = 1;
  plan.replicas = 400;
  plan.seed = 5;
  plan.grid_points = 1024;
  const auto r = bias_scan(plan);
  const double prior_half_width = credible_interval(Posterior::uniform(PhaseGrid(1024)));
  EXPECT_LT(r.records[0].mean_dtheta, prior_half_width);
  EXPECT_GT(r.records[0].mean_dtheta, 0.5);
}

TEST(Scan, WidthScalesAsInverseRootP) {
  ExperimentPlan plan;
  plan.theta_grid = {0.3 * kPi, 0.6 * kPi};
  plan.replicas = 50;
  plan.seed = 17;
  plan.shots = 100;
  const auto r100 = bias_scan(plan);
  plan.shots = 1000;
  const auto r1000 = bias_scan(plan);
  for (std::size_t j = 0; j < 2; ++j) {
    const double ratio =
        r100.records[j].mean_dtheta / r1000.records[j].mean_dtheta;
    EXPECT_NEAR(ratio / std::sqrt(10.0), 1.0, 0.10);
  }
}

TEST(Scan, BayesWidthApproachesIdealBound) {
  ExperimentPlan plan;
  plan.theta_grid = {0.25 * kPi, 0.5 * kPi, 0.75 * kPi};
  plan.replicas = 50;
  plan.seed = 99;
  const auto r = sensitivity_scan(plan);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(r.records[j].mean_dtheta / r.reference[j].crlb_ideal, 1.0, 0.15);
    EXPECT_NEAR(r.records[j].sd_est / r.reference[j].crlb_ideal, 1.0, 0.3);
    EXPECT_TRUE(std::isnan(r.reference[j].crlb_fit));
  }
}

TEST(Scan, ClassicalBiasedNearEdgeWhileBayesIsNot) {
  ExperimentPlan plan;
  plan.theta_grid = {0.05 * kPi};
  plan.shots = 50;
  plan.replicas = 200;
  plan.seed = 4;
  plan.estimators = {Estimator::bayes, Estimator::classical};
  const auto r = bias_scan(plan);
  const auto& classical = r.record(0, Estimator::classical);
  const auto& bayes = r.record(0, Estimator::bayes);
  EXPECT_FALSE(classical.unbiased);
  EXPECT_GT(std::abs(classical.bias), std::abs(bayes.bias));
}

TEST(Scan, ContextEvaluatesRecordedData) {
  auto plan = small_plan();
  EstimationContext ctx(plan);
  const std::vector<Outcome> shots{{2, 1}};
  const auto r = ctx.evaluate(shots);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[1].estimate, std::acos(1.0 / 3.0), 1e-7);
  EXPECT_NEAR(r[1].delta, crlb(1.08, 1), 1e-12);
  EXPECT_NEAR(r[2].estimate, std::acos(1.0 / 1.08), 1e-12);
  EXPECT_NEAR(r[3].estimate, std::acos(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(r[3].delta, 1.0 / std::sqrt(3.0), 1e-15);

  const std::vector<Outcome> dark{{0, 0}};
  const auto d = ctx.evaluate(dark);
  EXPECT_TRUE(std::isnan(d[3].estimate));
  EXPECT_NEAR(d[0].estimate, kPi / 2, 1e-9);
}

TEST(Scan, RunEstimationMatchesContext) {
  auto plan = small_plan();
  RandomStream a(123);
  RandomStream b(123);
  const auto [mean, width] = run_estimation(0.4, plan, a);
  plan.estimators = {Estimator::bayes};
  EstimationContext ctx(plan);
  const auto r = ctx.run(0.4, b);
  EXPECT_EQ(mean, r[0].estimate);
  EXPECT_EQ(width, r[0].delta);
}

TEST(Output, CsvAndManifest) {
  auto plan = small_plan();
  plan.replicas = 3;
  const auto r = sensitivity_scan(plan);
  const auto csv = scan_csv(r);
  EXPECT_EQ(csv.rfind("theta,estimator,mean_est,bias,mean_dtheta,sd_est,sd_dtheta\n0.25,bayes,", 0), 0u);
  std::ostringstream sens;
  write_sensitivity_csv(sens, r);
  EXPECT_EQ(sens.str().rfind("theta,estimator,sqrtp_dtheta,sqrtp_dtheta_sd,"
                             "sqrtp_crlb,sqrtp_crlb_fit,sqrtp_classical\n",
                             0),
            0u);
  const auto manifest = run_manifest(r);
  EXPECT_EQ(manifest.at("kind"), "sensitivity");
  EXPECT_EQ(manifest.at("seed"), 31);
  EXPECT_EQ(manifest.at("version"), std::string(library_version()));
  EXPECT_EQ(manifest.at("plan").at("p"), 200);
  EXPECT_DOUBLE_EQ(manifest.at("plan").at("theta")[0].get<double>(), 0.25);
}
