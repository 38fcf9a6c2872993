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

#include "mzphase/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "mzphase/errors.hpp"
#include "mzphase/nnls.hpp"

namespace mzphase {

namespace {

constexpr double kStochasticTolerance = 1e-9;

void validate_channel(const ChannelMatrix& k, std::uint32_t n_max,
                      const char* name) {
  const std::size_t dim = n_max + 1;
  if (k.size() != dim) {
    throw FormatError(std::string(name) + ": expected " + std::to_string(dim) +
                      " rows");
  }
  for (const auto& row : k) {
    if (row.size() != dim) {
      throw FormatError(std::string(name) + ": expected " +
                        std::to_string(dim) + " columns");
    }
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw FormatError(std::string(name) + ": entry outside [0, 1]");
      }
    }
  }
  for (std::size_t t = 0; t < dim; ++t) {
    double sum = 0.0;
    for (std::size_t m = 0; m < dim; ++m) sum += k[m][t];
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw FormatError(std::string(name) + ": column " + std::to_string(t) +
                        " sums to " + std::to_string(sum));
    }
  }
}

void normalize_columns(ChannelMatrix& k) {
  const std::size_t dim = k.size();
  for (std::size_t t = 0; t < dim; ++t) {
    double sum = 0.0;
    for (std::size_t m = 0; m < dim; ++m) sum += k[m][t];
    if (sum > 0.0) {
      for (std::size_t m = 0; m < dim; ++m) k[m][t] /= sum;
    } else {
      for (std::size_t m = 0; m < dim; ++m) k[m][t] = (m == t) ? 1.0 : 0.0;
    }
  }
}

double channel_entry(const ChannelMatrix& k, std::uint32_t n_max,
                     std::uint32_t reported, std::uint32_t true_count) {
  if (reported > n_max) return 0.0;
  return k[reported][std::min(true_count, n_max)];
}

std::uint32_t draw_reported(const ChannelMatrix& k, std::uint32_t n_max,
                            std::uint32_t true_count, RandomStream& rng) {
  const std::uint32_t t = std::min(true_count, n_max);
  const double u = rng.uniform();
  double cdf = 0.0;
  std::uint32_t last_nonzero = t;
  for (std::uint32_t m = 0; m <= n_max; ++m) {
    const double p = k[m][t];
    if (p <= 0.0) continue;
    last_nonzero = m;
    cdf += p;
    if (u < cdf) return m;
  }
  return last_nonzero;
}

// P(true count = t) for a Poisson port mean, with t = n_max holding the
// whole upper tail.
double folded_pmf(std::uint32_t t, double mean, std::uint32_t n_max) {
  if (t < n_max) return poisson_pmf(t, mean);
  if (t > n_max) return 0.0;
  double tail = 0.0;
  for (std::uint32_t k = n_max; k < n_max + 400; ++k) {
    const double term = poisson_pmf(k, mean);
    tail += term;
    if (k > mean && term < 1e-18 * tail) break;
  }
  return tail;
}

DenseMatrix port_basis(std::span<const double> means, std::uint32_t n_max) {
  DenseMatrix basis(means.size(), n_max + 1);
  for (std::size_t j = 0; j < means.size(); ++j) {
    for (std::uint32_t t = 0; t <= n_max; ++t) {
      basis(j, t) = folded_pmf(t, means[j], n_max);
    }
  }
  return basis;
}

}  // namespace

// --- ConfusionModel ---------------------------------------------------------

ConfusionModel::ConfusionModel(std::uint32_t n_max, ChannelMatrix forward_c,
                               ChannelMatrix forward_d)
    : n_max_(n_max),
      forward_c_(std::move(forward_c)),
      forward_d_(std::move(forward_d)) {
  validate_channel(forward_c_, n_max_, "forward_c");
  validate_channel(forward_d_, n_max_, "forward_d");
  normalize_columns(forward_c_);
  normalize_columns(forward_d_);
}

ConfusionModel ConfusionModel::identity(std::uint32_t n_max) {
  ChannelMatrix k(n_max + 1, std::vector<double>(n_max + 1, 0.0));
  for (std::uint32_t i = 0; i <= n_max; ++i) k[i][i] = 1.0;
  return ConfusionModel(n_max, k, k);
}

ConfusionModel ConfusionModel::symmetric(std::uint32_t n_max,
                                         const ChannelMatrix& k) {
  return ConfusionModel(n_max, k, k);
}

double ConfusionModel::port_c(std::uint32_t reported,
                              std::uint32_t true_count) const {
  return channel_entry(forward_c_, n_max_, reported, true_count);
}

double ConfusionModel::port_d(std::uint32_t reported,
                              std::uint32_t true_count) const {
  return channel_entry(forward_d_, n_max_, reported, true_count);
}

bool ConfusionModel::is_identity() const {
  for (std::uint32_t m = 0; m <= n_max_; ++m) {
    for (std::uint32_t t = 0; t <= n_max_; ++t) {
      const double expect = m == t ? 1.0 : 0.0;
      if (forward_c_[m][t] != expect || forward_d_[m][t] != expect) {
        return false;
      }
    }
  }
  return true;
}

Outcome apply_noise(Outcome true_outcome, const ConfusionModel& model,
                    RandomStream& rng) {
  const auto n_c =
      draw_reported(model.forward_c(), model.n_max(), true_outcome.n_c, rng);
  const auto n_d =
      draw_reported(model.forward_d(), model.n_max(), true_outcome.n_d, rng);
  return {n_c, n_d};
}

double noisy_joint_likelihood(double phi, Outcome measured,
                              const ConfusionModel& model,
                              const InterferometerModel& ideal) {
  const auto [mu_c, mu_d] = ideal.output_means(phi);
  if (measured.n_c > model.n_max() || measured.n_d > model.n_max()) return 0.0;
  double port_c = 0.0;
  double port_d = 0.0;
  for (std::uint32_t t = 0; t <= ideal.max_count(); ++t) {
    port_c += model.port_c(measured.n_c, t) * poisson_pmf(t, mu_c);
    port_d += model.port_d(measured.n_d, t) * poisson_pmf(t, mu_d);
  }
  return port_c * port_d;
}

double NoisyLikelihood::log_likelihood_sum(
    const std::map<Outcome, std::uint64_t>& counts, double phi) const {
  const auto [mu_c, mu_d] = ideal_.output_means(phi);
  const std::uint32_t dim = model_.n_max() + 1;
  std::vector<double> port_c(dim, 0.0);
  std::vector<double> port_d(dim, 0.0);
  for (std::uint32_t t = 0; t <= ideal_.max_count(); ++t) {
    const double pc = poisson_pmf(t, mu_c);
    const double pd = poisson_pmf(t, mu_d);
    for (std::uint32_t m = 0; m < dim; ++m) {
      port_c[m] += model_.port_c(m, t) * pc;
      port_d[m] += model_.port_d(m, t) * pd;
    }
  }
  double sum = 0.0;
  for (const auto& [outcome, count] : counts) {
    if (count == 0) continue;
    const double p = (outcome.n_c < dim && outcome.n_d < dim)
                         ? port_c[outcome.n_c] * port_d[outcome.n_d]
                         : 0.0;
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += static_cast<double>(count) * std::log(p);
  }
  return sum;
}

// --- Calibration ------------------------------------------------------------

std::uint64_t CalibrationData::pulses(std::size_t phase_index) const {
  const auto& h = counts.at(phase_index);
  return std::accumulate(h.begin(), h.end(), std::uint64_t{0});
}

std::uint64_t CalibrationData::observed(Outcome o) const {
  if (o.n_c > n_max || o.n_d > n_max) return 0;
  std::uint64_t total = 0;
  for (const auto& h : counts) total += h[index(o)];
  return total;
}

CalibrationData simulate_calibration(std::span<const double> phases,
                                     std::uint64_t pulses_per_phase,
                                     const ConfusionModel& model,
                                     const InterferometerModel& ideal,
                                     std::uint64_t seed) {
  if (pulses_per_phase == 0) {
    throw DomainError("calibration needs at least one pulse per phase");
  }
  if (phases.empty()) throw DomainError("calibration needs at least one phase");
  for (double phi : phases) require_phase(phi);

  CalibrationData calib;
  calib.nbar = ideal.nbar();
  calib.n_max = model.n_max();
  calib.phases.assign(phases.begin(), phases.end());
  const std::size_t dim = model.n_max() + 1;
  calib.counts.assign(phases.size(), std::vector<std::uint64_t>(dim * dim, 0));

  constexpr std::uint64_t kCalibrationStream = ~std::uint64_t{0};
  for (std::size_t j = 0; j < phases.size(); ++j) {
    auto rng = stream_for(seed, j, kCalibrationStream);
    auto& h = calib.counts[j];
    for (std::uint64_t n = 0; n < pulses_per_phase; ++n) {
      const Outcome reported =
          apply_noise(ideal.sample(phases[j], rng), model, rng);
      ++h[calib.index(reported)];
    }
  }
  return calib;
}

std::vector<double> empirical_posterior(const CalibrationData& calib,
                                        Outcome measured) {
  const std::size_t n = calib.phases.size();
  std::vector<double> freq(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto total = calib.pulses(j);
    if (total > 0) {
      freq[j] = static_cast<double>(calib.count(j, measured)) /
                static_cast<double>(total);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return calib.phases[a] < calib.phases[b];
  });
  double evidence = freq[order.front()] * calib.phases[order.front()] +
                    freq[order.back()] *
                        (std::numbers::pi - calib.phases[order.back()]);
  for (std::size_t k = 1; k < n; ++k) {
    const auto a = order[k - 1];
    const auto b = order[k];
    evidence += 0.5 * (freq[a] + freq[b]) * (calib.phases[b] - calib.phases[a]);
  }
  if (evidence > 0.0) {
    for (auto& v : freq) v /= evidence;
  }
  return freq;
}

ConfusionModel fit_confusion(const CalibrationData& calib) {
  const std::uint32_t n_max = calib.n_max;
  const std::size_t dim = n_max + 1;
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < calib.phases.size(); ++j) {
    if (calib.pulses(j) > 0) used.push_back(j);
  }
  if (used.size() < dim) {
    throw FitError("calibration has " + std::to_string(used.size()) +
                   " usable phases; at least " + std::to_string(dim) +
                   " are needed");
  }

  auto fit_port = [&](bool port_c) {
    std::vector<double> means;
    for (auto j : used) {
      const double half = 0.5 * calib.phases[j];
      const double share = port_c ? std::cos(half) : std::sin(half);
      means.push_back(calib.nbar * share * share);
    }
    const DenseMatrix basis = port_basis(means, n_max);
    if (matrix_rank(basis) < dim) {
      throw FitError(std::string("calibration phases do not resolve port ") +
                     (port_c ? "c" : "d") + " count basis");
    }
    // Joint weighted fit of all K[m][t] for this port. Each reported-count
    // frequency is weighted by its binomial standard error; extra rows tie
    // every column sum to one.
    const std::size_t n_used = used.size();
    DenseMatrix system(n_used * dim + dim, dim * dim);
    std::vector<double> rhs(n_used * dim + dim, 0.0);
    double max_weight = 0.0;
    for (std::size_t r = 0; r < n_used; ++r) {
      const auto j = used[r];
      const double pulses = static_cast<double>(calib.pulses(j));
      for (std::uint32_t m = 0; m < dim; ++m) {
        std::uint64_t hits = 0;
        for (std::uint32_t other = 0; other < dim; ++other) {
          hits += port_c ? calib.count(j, {m, other})
                         : calib.count(j, {other, m});
        }
        const double f = static_cast<double>(hits) / pulses;
        const double var =
            std::max(f, 1.0 / pulses) * std::max(1.0 - f, 1.0 / pulses) /
            pulses;
        const double w = 1.0 / std::sqrt(var);
        max_weight = std::max(max_weight, w);
        const std::size_t row = r * dim + m;
        for (std::uint32_t t = 0; t < dim; ++t) {
          system(row, m * dim + t) = w * basis(r, t);
        }
        rhs[row] = w * f;
      }
    }
    const double tie = 1e3 * max_weight;
    for (std::uint32_t t = 0; t < dim; ++t) {
      const std::size_t row = n_used * dim + t;
      for (std::uint32_t m = 0; m < dim; ++m) system(row, m * dim + t) = tie;
      rhs[row] = tie;
    }
    const auto sol = nnls(system, rhs);
    ChannelMatrix k(dim, std::vector<double>(dim, 0.0));
    for (std::uint32_t m = 0; m < dim; ++m) {
      for (std::uint32_t t = 0; t < dim; ++t) k[m][t] = sol.x[m * dim + t];
    }
    normalize_columns(k);
    return k;
  };

  return ConfusionModel(n_max, fit_port(true), fit_port(false));
}

// --- Retrodictive weights ---------------------------------------------------

RetrodictiveWeights::RetrodictiveWeights(std::uint32_t n_max)
    : n_max_(n_max) {
  const std::size_t pairs = (n_max + 1) * (n_max + 1);
  table_.assign(pairs, std::vector<double>(pairs, 1.0 / static_cast<double>(pairs)));
}

RetrodictiveWeights RetrodictiveWeights::identity(std::uint32_t n_max) {
  RetrodictiveWeights w(n_max);
  for (std::size_t i = 0; i < w.table_.size(); ++i) {
    std::fill(w.table_[i].begin(), w.table_[i].end(), 0.0);
    w.table_[i][i] = 1.0;
  }
  return w;
}

std::size_t RetrodictiveWeights::index(Outcome o) const {
  if (o.n_c > n_max_ || o.n_d > n_max_) {
    throw DomainError("count pair (" + std::to_string(o.n_c) + "," +
                      std::to_string(o.n_d) + ") exceeds detector range " +
                      std::to_string(n_max_));
  }
  return static_cast<std::size_t>(o.n_c) * (n_max_ + 1) + o.n_d;
}

Outcome RetrodictiveWeights::pair(std::size_t index) const {
  const auto dim = n_max_ + 1;
  return {static_cast<std::uint32_t>(index / dim),
          static_cast<std::uint32_t>(index % dim)};
}

double RetrodictiveWeights::weight(Outcome measured, Outcome true_pair) const {
  return table_[index(measured)][index(true_pair)];
}

std::span<const double> RetrodictiveWeights::distribution(
    Outcome measured) const {
  return table_[index(measured)];
}

void RetrodictiveWeights::set_distribution(Outcome measured,
                                           std::vector<double> weights) {
  auto& row = table_[index(measured)];
  if (weights.size() != row.size()) {
    throw DomainError("weight row has wrong length");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("retrodictive weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw DomainError("retrodictive weights sum to zero");
  for (auto& w : weights) w /= sum;
  row = std::move(weights);
}

std::vector<double> phase_averaged_pair_probabilities(double nbar,
                                                      std::uint32_t n_max,
                                                      const PhaseGrid& grid) {
  const std::size_t dim = n_max + 1;
  std::vector<double> pbar(dim * dim, 0.0);
  std::vector<double> column(grid.size());
  std::vector<std::vector<double>> pc(dim, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> pd(dim, std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = std::cos(0.5 * grid[i]);
    const double s = std::sin(0.5 * grid[i]);
    for (std::uint32_t t = 0; t < dim; ++t) {
      pc[t][i] = folded_pmf(t, nbar * c * c, n_max);
      pd[t][i] = folded_pmf(t, nbar * s * s, n_max);
    }
  }
  for (std::uint32_t tc = 0; tc < dim; ++tc) {
    for (std::uint32_t td = 0; td < dim; ++td) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        column[i] = pc[tc][i] * pd[td][i];
      }
      pbar[tc * dim + td] = grid.integrate(column) / std::numbers::pi;
    }
  }
  return pbar;
}

RetrodictiveWeights retrodictive_weights(const ConfusionModel& model,
                                         double nbar, const PhaseGrid& grid) {
  const std::uint32_t n_max = model.n_max();
  const auto pbar = phase_averaged_pair_probabilities(nbar, n_max, grid);
  RetrodictiveWeights weights(n_max);
  for (std::size_t mi = 0; mi < weights.pair_count(); ++mi) {
    const Outcome m = weights.pair(mi);
    std::vector<double> row(weights.pair_count(), 0.0);
    double sum = 0.0;
    for (std::size_t ti = 0; ti < row.size(); ++ti) {
      const Outcome t = weights.pair(ti);
      row[ti] = model.port_c(m.n_c, t.n_c) * model.port_d(m.n_d, t.n_d) *
                pbar[ti];
      sum += row[ti];
    }
    if (sum > 0.0) {
      weights.set_distribution(m, std::move(row));
    } else {
      weights.mark_fallback(m);
    }
  }
  return weights;
}

RetrodictiveWeights fit_retrodictive_weights(const CalibrationData& calib,
                                             const PhaseGrid& grid) {
  const ConfusionModel fitted = fit_confusion(calib);
  RetrodictiveWeights weights = retrodictive_weights(fitted, calib.nbar, grid);
  const auto& already = weights.fallback_pairs();
  for (std::size_t mi = 0; mi < weights.pair_count(); ++mi) {
    const Outcome m = weights.pair(mi);
    if (calib.observed(m) > 0) continue;
    weights.set_distribution(m, std::vector<double>(weights.pair_count(), 1.0));
    if (std::find(already.begin(), already.end(), m) == already.end()) {
      weights.mark_fallback(m);
    }
  }
  return weights;
}

std::vector<double> FittedShotPosterior::log_density(
    Outcome measured, const PhaseGrid& grid) const {
  const auto dist = weights_.distribution(measured);
  std::vector<double> mixture(grid.size(), 0.0);
  for (std::size_t ti = 0; ti < dist.size(); ++ti) {
    const double w = dist[ti];
    if (w <= 0.0) continue;
    const auto basis = single_shot_log_density(weights_.pair(ti), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      mixture[i] += w * std::exp(basis[i]);
    }
  }
  for (auto& v : mixture) {
    v = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  return mixture;
}

Posterior posterior_fit(Outcome measured, const RetrodictiveWeights& weights,
                        const PhaseGrid& grid) {
  const FittedShotPosterior source(weights);
  return Posterior::from_log_density(grid, source.log_density(measured, grid));
}

}  // namespace mzphase
