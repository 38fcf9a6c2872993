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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "mzphase/errors.hpp"
#include "mzphase/fisher.hpp"
#include "mzphase/io.hpp"
#include "mzphase/posterior.hpp"

#ifndef MZPHASE_VERSION
#define MZPHASE_VERSION "unknown"
#endif

namespace mzphase {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  double mean = kNaN;
  double sd = kNaN;
  std::size_t n = 0;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++m.n;
    }
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n < 2) return m;
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - m.mean) * (v - m.mean);
  }
  m.sd = std::sqrt(ss / static_cast<double>(m.n - 1));
  return m;
}

}  // namespace

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::bayes: return "bayes";
    case Estimator::ml: return "ml";
    case Estimator::classical: return "classical";
    case Estimator::fringe: return "fringe";
    case Estimator::ymk: return "ymk";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (auto e : {Estimator::bayes, Estimator::ml, Estimator::classical,
                 Estimator::fringe, Estimator::ymk}) {
    if (to_string(e) == name) return e;
  }
  throw FormatError("unknown estimator '" + std::string(name) + "'");
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k * kPi);
  return grid;
}

void ExperimentPlan::validate() const {
  if (!(nbar > 0.0)) throw DomainError("plan: nbar must be positive");
  if (shots < 1) throw DomainError("plan: p must be >= 1");
  if (replicas < 1) throw DomainError("plan: replicas must be >= 1");
  if (theta_grid.empty()) throw DomainError("plan: empty theta grid");
  for (double theta : theta_grid) require_phase(theta);
  if (estimators.empty()) throw DomainError("plan: no estimators selected");
  if (grid_points < 2) throw DomainError("plan: grid needs >= 2 points");
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("plan: credible level must lie in (0, 1)");
  }
  if (fringe && !(fringe->amplitude > 0.0)) {
    throw DomainError("plan: fringe amplitude must be positive");
  }
}

struct EstimationContext::Impl {
  explicit Impl(const ExperimentPlan& p)
      : plan(p),
        grid(p.grid_points),
        ideal(p.nbar),
        fringe(p.fringe.value_or(FringeParams{0.0, 0.0, p.nbar})) {
    if (plan.noise) {
      source = std::make_unique<FittedShotPosterior>(plan.noise->weights);
      likelihood = std::make_unique<NoisyLikelihood>(
          plan.noise->fitted_channel, ideal);
    } else {
      source = std::make_unique<IdealShotPosterior>();
      likelihood = std::make_unique<InterferometerModel>(ideal);
    }
    table = std::make_unique<ShotPosteriorTable>(grid, *source);
  }

  double model_fisher(double theta) const {
    if (!plan.noise) return fisher_ideal(plan.nbar);
    const double inner = std::clamp(theta, 1e-3, kPi - 1e-3);
    return fisher_numeric(*likelihood, inner);
  }

  ExperimentPlan plan;
  PhaseGrid grid;
  InterferometerModel ideal;
  FringeParams fringe;
  std::unique_ptr<ShotPosteriorSource> source;
  std::unique_ptr<ShotLikelihood> likelihood;
  std::unique_ptr<ShotPosteriorTable> table;
};

EstimationContext::EstimationContext(const ExperimentPlan& plan)
    : impl_(std::make_unique<Impl>(plan)) {
  plan.validate();
}

EstimationContext::~EstimationContext() = default;

OutcomeSequence EstimationContext::simulate(double theta,
                                            RandomStream& rng) const {
  require_phase(theta);
  OutcomeSequence outcomes;
  outcomes.reserve(impl_->plan.shots);
  for (std::uint32_t i = 0; i < impl_->plan.shots; ++i) {
    Outcome o = impl_->ideal.sample(theta, rng);
    if (impl_->plan.noise) o = apply_noise(o, impl_->plan.noise->channel, rng);
    outcomes.push_back(o);
  }
  return outcomes;
}

Posterior EstimationContext::posterior(std::span<const Outcome> outcomes) {
  return accumulate(outcomes, *impl_->table);
}

EstimationResult EstimationContext::evaluate(
    std::span<const Outcome> outcomes) {
  const auto& plan = impl_->plan;
  const auto p = static_cast<std::uint64_t>(outcomes.size());
  EstimationResult result;
  result.reserve(plan.estimators.size());
  for (auto e : plan.estimators) {
    switch (e) {
      case Estimator::bayes: {
        const Posterior post = posterior(outcomes);
        result.push_back(
            {posterior_mean(post), credible_interval(post, plan.level)});
        break;
      }
      case Estimator::ml: {
        const auto ml = ml_estimate(outcomes, *impl_->likelihood, impl_->grid);
        const double f = impl_->model_fisher(ml.phase);
        result.push_back({ml.phase, f > 0.0 ? crlb(f, p) : kNaN});
        break;
      }
      case Estimator::classical: {
        const double est = classical_estimate(outcomes, plan.nbar);
        const double delta = (est > 0.0 && est < kPi)
                                 ? classical_uncertainty(est, plan.nbar, p)
                                 : kNaN;
        result.push_back({est, delta});
        break;
      }
      case Estimator::fringe: {
        const auto& fringe = impl_->fringe;
        const double est = noisy_classical_estimate(outcomes, fringe);
        // Error propagation through the fitted fringe, using the observed
        // spread of the per-pulse count difference.
        const double mean = mean_difference(outcomes);
        double ss = 0.0;
        for (const auto& o : outcomes) {
          const double d = static_cast<double>(o.n_c) - static_cast<double>(o.n_d);
          ss += (d - mean) * (d - mean);
        }
        const double spread =
            p > 1 ? std::sqrt(ss / static_cast<double>(p - 1)) : std::sqrt(plan.nbar);
        const double slope =
            fringe.amplitude * std::abs(std::sin(est + fringe.offset_phase));
        const double delta =
            slope > 0.0 ? spread / (std::sqrt(static_cast<double>(p)) * slope) : kNaN;
        result.push_back({est, delta});
        break;
      }
      case Estimator::ymk: {
        std::uint64_t photons = 0;
        for (const auto& o : outcomes) photons += o.total();
        if (photons == 0) {
          result.push_back({kNaN, kNaN});
        } else {
          result.push_back({ymk_estimate(outcomes),
                            1.0 / std::sqrt(static_cast<double>(photons))});
        }
        break;
      }
    }
  }
  return result;
}

EstimationResult EstimationContext::run(double theta, RandomStream& rng) {
  const auto outcomes = simulate(theta, rng);
  return evaluate(outcomes);
}

std::pair<double, double> run_estimation(double theta,
                                         const ExperimentPlan& plan,
                                         RandomStream& rng) {
  ExperimentPlan single = plan;
  single.estimators = {Estimator::bayes};
  EstimationContext ctx(single);
  const auto r = ctx.run(theta, rng);
  return {r[0].estimate, r[0].delta};
}

const ScanRecord& ScanResult::record(std::size_t phase_index,
                                     Estimator e) const {
  const std::size_t n_est = plan.estimators.size();
  for (std::size_t k = 0; k < n_est; ++k) {
    if (plan.estimators[k] == e) return records.at(phase_index * n_est + k);
  }
  throw DomainError("estimator not part of this scan");
}

ScanResult run_scan(const ExperimentPlan& plan) {
  plan.validate();
  const std::size_t n_phase = plan.theta_grid.size();
  const std::size_t n_rep = plan.replicas;
  const std::size_t n_tasks = n_phase * n_rep;

  ScanResult result;
  result.kind = "scan";
  result.plan = plan;
  result.samples.assign(n_phase, std::vector<EstimationResult>(n_rep));

  unsigned workers = plan.threads != 0 ? plan.threads
                                       : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_tasks));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      EstimationContext ctx(plan);
      for (std::size_t task = next++; task < n_tasks && !failed; task = next++) {
        const std::size_t j = task / n_rep;
        const std::size_t r = task % n_rep;
        auto rng = stream_for(plan.seed, j, r);
        result.samples[j][r] = ctx.run(plan.theta_grid[j], rng);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  const std::size_t n_est = plan.estimators.size();
  result.records.reserve(n_phase * n_est);
  for (std::size_t j = 0; j < n_phase; ++j) {
    for (std::size_t k = 0; k < n_est; ++k) {
      std::vector<double> est(n_rep);
      std::vector<double> delta(n_rep);
      for (std::size_t r = 0; r < n_rep; ++r) {
        est[r] = result.samples[j][r][k].estimate;
        delta[r] = result.samples[j][r][k].delta;
      }
      const Moments me = moments(est);
      const Moments md = moments(delta);
      ScanRecord rec;
      rec.theta = plan.theta_grid[j];
      rec.estimator = plan.estimators[k];
      rec.mean_est = me.mean;
      rec.bias = me.mean - rec.theta;
      rec.mean_dtheta = md.mean;
      rec.sd_est = me.sd;
      rec.sd_dtheta = md.sd;
      rec.replicas = me.n;
      rec.degenerate = me.n < 2;
      rec.unbiased = !rec.degenerate &&
                     std::abs(rec.bias) <
                         3.0 * rec.sd_est / std::sqrt(static_cast<double>(me.n));
      result.records.push_back(rec);
    }
  }
  return result;
}

ScanResult bias_scan(const ExperimentPlan& plan) {
  ScanResult result = run_scan(plan);
  result.kind = "bias";
  return result;
}

ScanResult sensitivity_scan(const ExperimentPlan& plan) {
  ScanResult result = run_scan(plan);
  result.kind = "sensitivity";
  const double p = plan.shots;
  std::unique_ptr<NoisyLikelihood> fitted;
  if (plan.noise) {
    fitted = std::make_unique<NoisyLikelihood>(plan.noise->fitted_channel,
                                               InterferometerModel(plan.nbar));
  }
  for (double theta : plan.theta_grid) {
    ReferenceRecord ref;
    ref.theta = theta;
    ref.crlb_ideal = crlb(fisher_ideal(plan.nbar), plan.shots);
    ref.crlb_fit = kNaN;
    if (fitted && theta > 1e-5 && theta < kPi - 1e-5) {
      const double f = fisher_numeric(*fitted, theta);
      ref.crlb_fit = f > 0.0 ? crlb(f, plan.shots)
                             : std::numeric_limits<double>::infinity();
    }
    const double s = std::sin(theta);
    ref.classical = s > 0.0 ? 1.0 / (std::sqrt(p * plan.nbar) * s)
                            : std::numeric_limits<double>::infinity();
    result.reference.push_back(ref);
  }
  return result;
}

void write_scan_csv(std::ostream& out, const ScanResult& result) {
  out << "theta,estimator,mean_est,bias,mean_dtheta,sd_est,sd_dtheta\n";
  for (const auto& r : result.records) {
    out << format_number(r.theta / kPi) << ',' << to_string(r.estimator) << ','
        << format_number(r.mean_est / kPi) << ',' << format_number(r.bias)
        << ',' << format_number(r.mean_dtheta) << ','
        << format_number(r.sd_est) << ',' << format_number(r.sd_dtheta)
        << '\n';
  }
}

void write_sensitivity_csv(std::ostream& out, const ScanResult& result) {
  out << "theta,estimator,sqrtp_dtheta,sqrtp_dtheta_sd,sqrtp_crlb,"
         "sqrtp_crlb_fit,sqrtp_classical\n";
  const double root_p = std::sqrt(static_cast<double>(result.plan.shots));
  const std::size_t n_est = result.plan.estimators.size();
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    const std::size_t j = i / n_est;
    const ReferenceRecord ref =
        j < result.reference.size()
            ? result.reference[j]
            : ReferenceRecord{r.theta, kNaN, kNaN, kNaN};
    out << format_number(r.theta / kPi) << ',' << to_string(r.estimator) << ','
        << format_number(root_p * r.mean_dtheta) << ','
        << format_number(root_p * r.sd_dtheta) << ','
        << format_number(root_p * ref.crlb_ideal) << ','
        << format_number(root_p * ref.crlb_fit) << ','
        << format_number(root_p * ref.classical) << '\n';
  }
}

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json j;
  j["nbar"] = plan.nbar;
  std::vector<double> theta;
  for (double t : plan.theta_grid) theta.push_back(t / kPi);
  j["theta"] = theta;
  j["p"] = plan.shots;
  j["replicas"] = plan.replicas;
  j["seed"] = plan.seed;
  std::vector<std::string> names;
  for (auto e : plan.estimators) names.emplace_back(to_string(e));
  j["estimators"] = names;
  j["grid_points"] = plan.grid_points;
  j["level"] = plan.level;
  if (plan.noise) {
    j["noise"] = {{"channel", to_json(plan.noise->channel)},
                  {"fitted_channel", to_json(plan.noise->fitted_channel)}};
  } else {
    j["noise"] = nullptr;
  }
  if (plan.fringe) {
    j["fringe"] = {{"a", plan.fringe->offset_phase},
                   {"b", plan.fringe->offset_counts},
                   {"amplitude", plan.fringe->amplitude}};
  } else {
    j["fringe"] = nullptr;
  }
  return j;
}

nlohmann::json run_manifest(const ScanResult& result) {
  return {{"kind", result.kind},
          {"seed", result.plan.seed},
          {"version", std::string(library_version())},
          {"plan", plan_to_json(result.plan)}};
}

std::string_view library_version() { return MZPHASE_VERSION; }

}  // namespace mzphase
