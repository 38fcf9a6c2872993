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

#include "mzphase/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mzphase/errors.hpp"
#include "mzphase/io.hpp"

namespace mzphase {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Inverse of a non-decreasing CDF sampled at the grid nodes, by linear
// interpolation inside the bracketing cell.
double invert_cdf(const PhaseGrid& grid, std::span<const double> cdf,
                  double target) {
  if (target <= cdf.front()) return grid[0];
  if (target >= cdf.back()) return grid[grid.size() - 1];
  auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
  const auto hi = static_cast<std::size_t>(it - cdf.begin());
  const std::size_t lo = hi - 1;
  const double width = cdf[hi] - cdf[lo];
  const double frac = width > 0.0 ? (target - cdf[lo]) / width : 0.0;
  return grid[lo] + frac * (grid[hi] - grid[lo]);
}

double interpolate(const PhaseGrid& grid, std::span<const double> values,
                   double phi) {
  const double pos = phi / grid.spacing();
  auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo >= grid.size() - 1) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

Posterior::Posterior(PhaseGrid grid, std::vector<double> log_density,
                     std::vector<double> density)
    : grid_(std::move(grid)),
      log_density_(std::move(log_density)),
      density_(std::move(density)) {}

Posterior Posterior::from_log_density(const PhaseGrid& grid,
                                      std::vector<double> log_unnormalized) {
  if (log_unnormalized.size() != grid.size()) {
    throw DomainError("log density size does not match grid");
  }
  const double peak =
      *std::max_element(log_unnormalized.begin(), log_unnormalized.end());
  if (!std::isfinite(peak)) {
    throw DegenerateEvidenceError(
        "posterior vanishes at every grid node");
  }
  std::vector<double> density(log_unnormalized.size());
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] = std::exp(log_unnormalized[i] - peak);
  }
  const double evidence = grid.integrate(density);
  if (!(evidence > 0.0) || !std::isfinite(evidence)) {
    throw DegenerateEvidenceError("posterior evidence is not positive");
  }
  const double log_norm = peak + std::log(evidence);
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] /= evidence;
    log_unnormalized[i] -= log_norm;
  }
  return Posterior(grid, std::move(log_unnormalized), std::move(density));
}

Posterior Posterior::uniform(const PhaseGrid& grid) {
  return from_log_density(grid, std::vector<double>(grid.size(), 0.0));
}

double log_normalization_constant(Outcome outcome) {
  const double nc = outcome.n_c;
  const double nd = outcome.n_d;
  return std::lgamma(1.0 + nc + nd) - std::lgamma(0.5 + nc) -
         std::lgamma(0.5 + nd);
}

double normalization_constant(Outcome outcome) {
  return std::exp(log_normalization_constant(outcome));
}

std::vector<double> single_shot_log_density(Outcome outcome,
                                            const PhaseGrid& grid) {
  const double log_c = log_normalization_constant(outcome);
  const double two_nc = 2.0 * outcome.n_c;
  const double two_nd = 2.0 * outcome.n_d;
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double half = 0.5 * grid[i];
    double v = log_c;
    if (outcome.n_c > 0) v += two_nc * std::log(std::cos(half));
    if (outcome.n_d > 0) v += two_nd * std::log(std::sin(half));
    out[i] = std::isnan(v) ? kNegInf : v;
  }
  return out;
}

Posterior single_shot_posterior(Outcome outcome, const PhaseGrid& grid) {
  return Posterior::from_log_density(grid,
                                     single_shot_log_density(outcome, grid));
}

const std::vector<double>& ShotPosteriorTable::operator()(Outcome outcome) {
  auto it = cache_.find(outcome);
  if (it == cache_.end()) {
    it = cache_.emplace(outcome, source_->log_density(outcome, grid_)).first;
  }
  return it->second;
}

std::map<Outcome, std::uint64_t> histogram(std::span<const Outcome> outcomes) {
  std::map<Outcome, std::uint64_t> counts;
  for (const auto& o : outcomes) ++counts[o];
  return counts;
}

Posterior accumulate(std::span<const Outcome> outcomes,
                     ShotPosteriorTable& table) {
  const PhaseGrid& grid = table.grid();
  if (outcomes.empty()) return Posterior::uniform(grid);
  std::vector<double> log_sum(grid.size(), 0.0);
  for (const auto& [outcome, count] : histogram(outcomes)) {
    const auto& shot = table(outcome);
    const double weight = static_cast<double>(count);
    for (std::size_t i = 0; i < log_sum.size(); ++i) {
      log_sum[i] += weight * shot[i];
    }
  }
  return Posterior::from_log_density(grid, std::move(log_sum));
}

Posterior accumulate(std::span<const Outcome> outcomes, const PhaseGrid& grid) {
  static const IdealShotPosterior ideal;
  ShotPosteriorTable table(grid, ideal);
  return accumulate(outcomes, table);
}

double posterior_mean(const Posterior& post) {
  const auto& grid = post.grid();
  const auto density = post.density();
  std::vector<double> moment(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) {
    moment[i] = grid[i] * density[i];
  }
  return std::clamp(grid.integrate(moment), 0.0, std::numbers::pi);
}

CredibleInterval credible_bounds(const Posterior& post, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("credible level must lie in (0, 1)");
  }
  const auto& grid = post.grid();
  auto cdf = grid.cumulative(post.density());
  const double total = cdf.back();
  for (auto& v : cdf) v /= total;

  const double mean = posterior_mean(post);
  const double at_mean = interpolate(grid, cdf, mean);
  double lower_target = at_mean - 0.5 * level;
  double upper_target = at_mean + 0.5 * level;
  if (lower_target < 0.0) {
    upper_target = level;
    lower_target = 0.0;
  } else if (upper_target > 1.0) {
    lower_target = 1.0 - level;
    upper_target = 1.0;
  }
  const double lower =
      lower_target <= 0.0 ? 0.0 : invert_cdf(grid, cdf, lower_target);
  const double upper = upper_target >= 1.0
                           ? std::numbers::pi
                           : invert_cdf(grid, cdf, upper_target);
  return {lower, upper};
}

double credible_interval(const Posterior& post, double level) {
  return credible_bounds(post, level).half_width();
}

void write_posterior_csv(std::ostream& out, const Posterior& post) {
  out << "phi,density\n";
  const auto& grid = post.grid();
  const auto density = post.density();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_number(grid[i] / std::numbers::pi) << ','
        << format_number(density[i]) << '\n';
  }
}

}  // namespace mzphase
