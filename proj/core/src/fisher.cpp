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

#include "mzphase/fisher.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mzphase/errors.hpp"
#include "mzphase/io.hpp"

namespace mzphase {

double fisher_ideal(double nbar) {
  if (!(nbar > 0.0)) throw DomainError("mean photon number must be positive");
  return nbar;
}

double probability_derivative(const ShotLikelihood& model, double theta,
                              Outcome outcome, double d_theta, int order) {
  const double h = d_theta;
  if (order == 4) {
    return (-model.probability(theta + 2 * h, outcome) +
            8.0 * model.probability(theta + h, outcome) -
            8.0 * model.probability(theta - h, outcome) +
            model.probability(theta - 2 * h, outcome)) /
           (12.0 * h);
  }
  return (model.probability(theta + h, outcome) -
          model.probability(theta - h, outcome)) /
         (2.0 * h);
}

double fisher_numeric(const ShotLikelihood& model, double theta,
                      const FisherOptions& options) {
  const double h = options.d_theta;
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("finite-difference step must be positive");
  }
  if (!(theta - h >= 0.0 && theta + h <= std::numbers::pi)) {
    throw DomainError(
        "Fisher information needs theta inside (0, pi) by at least one step");
  }
  const std::uint32_t n_max = options.n_max.value_or(model.max_count());
  double fisher = 0.0;
  for (std::uint32_t nc = 0; nc <= n_max; ++nc) {
    for (std::uint32_t nd = 0; nd <= n_max; ++nd) {
      const Outcome o{nc, nd};
      const double p = model.probability(theta, o);
      if (p < options.skip_below) continue;
      const double dp = probability_derivative(model, theta, o, h);
      fisher += dp * dp / p;
    }
  }
  return fisher;
}

double crlb(double fisher, std::uint64_t p) {
  if (!(fisher > 0.0)) throw DomainError("Fisher information must be positive");
  if (p == 0) throw DomainError("number of measurements must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(p) * fisher);
}

std::vector<FisherPoint> fisher_curve(const ShotLikelihood& model,
                                      std::span<const double> thetas,
                                      std::uint64_t p,
                                      const FisherOptions& options) {
  std::vector<FisherPoint> curve;
  curve.reserve(thetas.size());
  for (double theta : thetas) {
    const double f = fisher_numeric(model, theta, options);
    const double bound =
        f > 0.0 ? crlb(f, p) : std::numeric_limits<double>::infinity();
    curve.push_back({theta, f, bound});
  }
  return curve;
}

void write_fisher_csv(std::ostream& out, std::span<const FisherPoint> curve) {
  out << "theta,fisher,crlb\n";
  for (const auto& pt : curve) {
    out << format_number(pt.theta / std::numbers::pi) << ','
        << format_number(pt.fisher) << ',' << format_number(pt.crlb) << '\n';
  }
}

}  // namespace mzphase
