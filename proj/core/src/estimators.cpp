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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "mzphase/errors.hpp"
#include "mzphase/posterior.hpp"

namespace mzphase {

namespace {

constexpr double kPi = std::numbers::pi;

double reflect_into_half_period(double x) {
  x = std::fmod(x, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  if (x > kPi) x = 2.0 * kPi - x;
  return std::clamp(x, 0.0, kPi);
}

template <class F>
double golden_section_max(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double mean_difference(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw DomainError("estimator needs at least one pulse");
  double sum = 0.0;
  for (const auto& o : outcomes) {
    sum += static_cast<double>(o.n_c) - static_cast<double>(o.n_d);
  }
  return sum / static_cast<double>(outcomes.size());
}

double classical_estimate(std::span<const Outcome> outcomes, double nbar) {
  if (!(nbar > 0.0)) throw DomainError("mean photon number must be positive");
  return std::acos(std::clamp(mean_difference(outcomes) / nbar, -1.0, 1.0));
}

double classical_uncertainty(double theta, double nbar, std::uint64_t p) {
  require_phase(theta);
  if (!(nbar > 0.0) || p == 0) {
    throw DomainError("classical uncertainty needs nbar > 0 and p >= 1");
  }
  const double s = std::sin(theta);
  if (theta == 0.0 || theta == kPi || !(s > 0.0)) {
    throw DomainError("classical uncertainty diverges at theta = 0 and pi");
  }
  return 1.0 / (std::sqrt(static_cast<double>(p) * nbar) * s);
}

FringeFit fit_fringe(std::span<const FringePoint> points) {
  std::set<double> distinct;
  for (const auto& pt : points) distinct.insert(pt.phase);
  if (distinct.size() < 3) {
    throw FitError("fringe fit needs at least three distinct phases");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    design(i, 0) = std::cos(pt.phase);
    design(i, 1) = std::sin(pt.phase);
    design(i, 2) = 1.0;
    y(i) = pt.mean_difference;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw FitError("fringe design matrix is rank deficient");
  const Eigen::Vector3d coef = qr.solve(y);
  // coef = (A cos a, -A sin a, b)
  const double alpha = coef(0);
  const double beta = coef(1);
  const double amplitude = std::hypot(alpha, beta);

  FringeFit fit;
  fit.params.amplitude = amplitude;
  fit.params.offset_phase = std::atan2(-beta, alpha);
  fit.params.offset_counts = coef(2);
  const Eigen::VectorXd resid = design * coef - y;
  const double rss = resid.squaredNorm();
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));

  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (!(amplitude > 1e-9 * scale)) {
    throw FitError("no fringe: mean photon difference does not vary with phase");
  }
  if (n > 3) {
    const double sigma2 = rss / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov =
        sigma2 * (design.transpose() * design).inverse();
    const double ga = alpha / amplitude;
    const double gb = beta / amplitude;
    fit.se_amplitude = std::sqrt(std::max(
        0.0, ga * ga * cov(0, 0) + 2 * ga * gb * cov(0, 1) + gb * gb * cov(1, 1)));
    // d atan2(-beta, alpha): (beta, -alpha) / A^2
    const double pa = beta / (amplitude * amplitude);
    const double pb = -alpha / (amplitude * amplitude);
    fit.se_offset_phase = std::sqrt(std::max(
        0.0, pa * pa * cov(0, 0) + 2 * pa * pb * cov(0, 1) + pb * pb * cov(1, 1)));
    fit.se_offset_counts = std::sqrt(std::max(0.0, cov(2, 2)));
    if (amplitude < 3.0 * fit.se_amplitude) {
      throw FitError("no significant fringe in calibration data");
    }
  }
  return fit;
}

FringeFit fit_fringe(const CalibrationData& calib) {
  std::vector<FringePoint> points;
  for (std::size_t j = 0; j < calib.phases.size(); ++j) {
    const auto pulses = calib.pulses(j);
    if (pulses == 0) continue;
    double diff = 0.0;
    for (std::uint32_t nc = 0; nc <= calib.n_max; ++nc) {
      for (std::uint32_t nd = 0; nd <= calib.n_max; ++nd) {
        diff += (static_cast<double>(nc) - static_cast<double>(nd)) *
                static_cast<double>(calib.count(j, {nc, nd}));
      }
    }
    points.push_back({calib.phases[j], diff / static_cast<double>(pulses)});
  }
  return fit_fringe(points);
}

double noisy_classical_estimate(std::span<const Outcome> outcomes,
                                const FringeParams& params) {
  if (!(params.amplitude > 0.0)) {
    throw DomainError("fringe amplitude must be positive");
  }
  const double arg = std::clamp(
      (mean_difference(outcomes) - params.offset_counts) / params.amplitude,
      -1.0, 1.0);
  return reflect_into_half_period(std::acos(arg) - params.offset_phase);
}

double ymk_estimate(Outcome outcome) {
  if (outcome.total() == 0) {
    throw DomainError("YMK estimate undefined without detected photons");
  }
  const double diff =
      static_cast<double>(outcome.n_c) - static_cast<double>(outcome.n_d);
  return std::acos(std::clamp(diff / outcome.total(), -1.0, 1.0));
}

double ymk_estimate(std::span<const Outcome> outcomes) {
  Outcome pooled;
  for (const auto& o : outcomes) {
    pooled.n_c += o.n_c;
    pooled.n_d += o.n_d;
  }
  return ymk_estimate(pooled);
}

MlEstimate ml_estimate(std::span<const Outcome> outcomes,
                       const ShotLikelihood& model, const PhaseGrid& grid) {
  if (outcomes.empty()) throw DomainError("ML estimate needs at least one pulse");
  const auto counts = histogram(outcomes);
  auto loglik = [&](double phi) { return model.log_likelihood_sum(counts, phi); };

  std::size_t best = 0;
  double best_value = loglik(grid[0]);
  double lowest = best_value;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = loglik(grid[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
    lowest = std::min(lowest, v);
  }
  if (!std::isfinite(best_value)) {
    throw DegenerateEvidenceError("likelihood vanishes on the whole grid");
  }
  if (std::isfinite(lowest) &&
      best_value - lowest <= 1e-12 * (1.0 + std::abs(best_value))) {
    return {kPi / 2.0, true};
  }

  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double refined = golden_section_max(loglik, lo, hi);
  double estimate = grid[best];
  double value = best_value;
  for (double candidate : {refined, lo, hi}) {
    const double v = loglik(candidate);
    if (v > value || (v == value && candidate < estimate)) {
      value = v;
      estimate = candidate;
    }
  }
  return {std::clamp(estimate, 0.0, kPi), false};
}

}  // namespace mzphase
