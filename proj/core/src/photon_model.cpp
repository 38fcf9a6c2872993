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

#include "mzphase/photon_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mzphase/errors.hpp"

namespace mzphase {

void require_phase(double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi)) {
    throw DomainError("phase " + std::to_string(phi) +
                      " outside [0, pi]");
  }
}

double poisson_pmf(std::uint32_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

double ShotLikelihood::log_likelihood_sum(
    const std::map<Outcome, std::uint64_t>& counts, double phi) const {
  double sum = 0.0;
  for (const auto& [outcome, count] : counts) {
    if (count == 0) continue;
    const double p = probability(phi, outcome);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += static_cast<double>(count) * std::log(p);
  }
  return sum;
}

InterferometerModel::InterferometerModel(double nbar, std::uint32_t n_max)
    : nbar_(nbar), n_max_(n_max) {
  if (!(nbar > 0.0) || !std::isfinite(nbar)) {
    throw DomainError("mean photon number must be positive and finite");
  }
}

OutputMeans InterferometerModel::output_means(double phi) const {
  require_phase(phi);
  const double c = std::cos(0.5 * phi);
  const double s = std::sin(0.5 * phi);
  return {nbar_ * c * c, nbar_ * s * s};
}

double InterferometerModel::probability(double phi, Outcome outcome) const {
  const auto [mu_c, mu_d] = output_means(phi);
  return poisson_pmf(outcome.n_c, mu_c) * poisson_pmf(outcome.n_d, mu_d);
}

double InterferometerModel::log_likelihood_sum(
    const std::map<Outcome, std::uint64_t>& counts, double phi) const {
  const auto [mu_c, mu_d] = output_means(phi);
  double total_c = 0.0;
  double total_d = 0.0;
  double shots = 0.0;
  for (const auto& [outcome, count] : counts) {
    const double n = static_cast<double>(count);
    total_c += n * outcome.n_c;
    total_d += n * outcome.n_d;
    shots += n;
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double sum = -shots * nbar_;
  if (total_c > 0.0) sum += mu_c > 0.0 ? total_c * std::log(mu_c) : kNegInf;
  if (total_d > 0.0) sum += mu_d > 0.0 ? total_d * std::log(mu_d) : kNegInf;
  return sum;
}

Outcome InterferometerModel::sample(double phi, RandomStream& rng) const {
  const auto [mu_c, mu_d] = output_means(phi);
  const auto n_c = rng.poisson(mu_c);
  const auto n_d = rng.poisson(mu_d);
  return {n_c, n_d};
}

double InterferometerModel::truncated_mass(double phi) const {
  const auto [mu_c, mu_d] = output_means(phi);
  double mass_c = 0.0;
  double mass_d = 0.0;
  for (std::uint32_t k = 0; k <= n_max_; ++k) {
    mass_c += poisson_pmf(k, mu_c);
    mass_d += poisson_pmf(k, mu_d);
  }
  return mass_c * mass_d;
}

}  // namespace mzphase
