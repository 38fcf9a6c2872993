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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "mzphase/errors.hpp"
#include "mzphase/estimators.hpp"
#include "mzphase/fisher.hpp"
#include "mzphase/io.hpp"
#include "mzphase/posterior.hpp"

namespace mzphase::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  const json* s = find(doc, name);
  if (s == nullptr) return empty;
  if (!s->is_object()) throw ConfigError(std::string(name) + ": expected an object");
  return *s;
}

double number(const json& obj, const char* key, double fallback,
              const std::string& where) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v->get<double>();
}

std::uint64_t count(const json& obj, const char* key, std::uint64_t fallback,
                    const std::string& where) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_unsigned()) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

fs::path path_value(const json& v, const fs::path& base,
                    const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a path string");
  const fs::path p = v.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

/// Phases in units of pi, either a list or {start, stop, count}.
std::vector<double> angles(const json& v, const std::string& where) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(where + ": expected numbers");
      out.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    const double start = number(v, "start", 0.05, where);
    const double stop = number(v, "stop", 0.95, where);
    const auto n = count(v, "count", 19, where);
    if (n < 1) throw ConfigError(where + ".count must be >= 1");
    for (std::uint64_t k = 0; k < n; ++k) {
      out.push_back(n == 1 ? start
                           : start + (stop - start) * static_cast<double>(k) /
                                         static_cast<double>(n - 1));
    }
  } else {
    throw ConfigError(where + ": expected a list or {start, stop, count}");
  }
  if (out.empty()) throw ConfigError(where + ": no phases given");
  for (double& x : out) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ConfigError(where + ": phases are in units of pi and must lie in [0, 1]");
    }
    x = std::min(x * kPi, kPi);
  }
  return out;
}

ConfusionModel channel_from_config(const json& v) {
  if (!v.is_object()) throw ConfigError("noise.channel: expected an object");
  if (const json* k = find(v, "symmetric")) {
    const auto n_max = static_cast<std::uint32_t>(count(v, "n_max", 4, "noise.channel"));
    return ConfusionModel::symmetric(n_max, k->get<ChannelMatrix>());
  }
  return confusion_from_json(v);
}

json read_json(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const FormatError&) {
    throw ConfigError("cannot read " + path.string());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string pair_name(Outcome o) {
  return "(" + std::to_string(o.n_c) + "," + std::to_string(o.n_d) + ")";
}

Config resolve(const CommonOptions& opts) {
  Config cfg = load_config(opts.config);
  if (opts.seed) {
    cfg.plan.seed = *opts.seed;
    cfg.calibration.seed = *opts.seed;
  }
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  return cfg;
}

struct Calibrated {
  CalibrationData data;
  ConfusionModel fitted;
  RetrodictiveWeights weights;
};

Calibrated calibrate(const Config& cfg) {
  const ConfusionModel channel =
      cfg.noise ? cfg.noise->channel : ConfusionModel::identity();
  const InterferometerModel ideal(cfg.nbar, cfg.n_max);
  CalibrationData data =
      cfg.calibration.pulse_files.empty()
          ? simulate_calibration(cfg.calibration.phases, cfg.calibration.pulses,
                                 channel, ideal, cfg.calibration.seed)
          : calibration_from_pulse_files(cfg.calibration.pulse_files, cfg.nbar,
                                         channel.n_max());
  ConfusionModel fitted = fit_confusion(data);
  RetrodictiveWeights weights =
      fit_retrodictive_weights(data, PhaseGrid(cfg.calibration.grid_points));
  return {std::move(data), std::move(fitted), std::move(weights)};
}

/// Attaches noise handling to the plan: weights from file when configured,
/// otherwise an in-process calibration.
void prepare_noise(Config& cfg, json& provenance) {
  if (!cfg.noise) return;
  const auto& noise = *cfg.noise;
  if (noise.weights_file) {
    RetrodictiveWeights weights = weights_from_json(read_json(*noise.weights_file));
    ConfusionModel fitted = noise.fitted_channel_file
                                ? confusion_from_json(read_json(*noise.fitted_channel_file))
                                : noise.channel;
    provenance["weights"] = noise.weights_file->string();
    cfg.plan.noise = NoiseSetup{noise.channel, std::move(weights), std::move(fitted)};
    return;
  }
  Calibrated cal = calibrate(cfg);
  provenance["weights"] = "in-process calibration";
  if (!cfg.plan.fringe) {
    cfg.plan.fringe = fit_fringe(cal.data).params;
  }
  cfg.plan.noise =
      NoiseSetup{noise.channel, std::move(cal.weights), std::move(cal.fitted)};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Config parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  Config cfg;
  cfg.document = doc;
  cfg.base_dir = base_dir;

  try {
    const json& model = section(doc, "model");
    cfg.nbar = number(model, "nbar", 1.08, "model");
    if (!(cfg.nbar > 0.0)) throw ConfigError("model.nbar must be positive");
    cfg.n_max = static_cast<std::uint32_t>(count(model, "n_max", 25, "model"));

    if (const json* noise = find(doc, "noise")) {
      const json* channel = find(*noise, "channel");
      if (channel == nullptr) throw ConfigError("noise.channel is required");
      NoiseSection ns{channel_from_config(*channel), std::nullopt, std::nullopt};
      if (const json* w = find(*noise, "weights")) {
        ns.weights_file = path_value(*w, base_dir, "noise.weights");
      }
      if (const json* f = find(*noise, "fitted_channel")) {
        ns.fitted_channel_file = path_value(*f, base_dir, "noise.fitted_channel");
      }
      cfg.noise = std::move(ns);
    }

    const json& plan = section(doc, "plan");
    auto& p = cfg.plan;
    p.nbar = cfg.nbar;
    if (const json* t = find(plan, "theta")) p.theta_grid = angles(*t, "plan.theta");
    p.shots = static_cast<std::uint32_t>(count(plan, "p", 1000, "plan"));
    p.replicas = static_cast<std::uint32_t>(count(plan, "replicas", 150, "plan"));
    p.seed = count(plan, "seed", 0, "plan");
    p.grid_points = count(plan, "grid_points", 4096, "plan");
    p.level = number(plan, "level", 0.6827, "plan");
    p.threads = static_cast<unsigned>(count(plan, "threads", 0, "plan"));
    if (const json* e = find(plan, "estimators")) {
      if (!e->is_array()) throw ConfigError("plan.estimators: expected a list");
      p.estimators.clear();
      for (const auto& name : *e) {
        if (!name.is_string()) throw ConfigError("plan.estimators: expected names");
        p.estimators.push_back(parse_estimator(name.get<std::string>()));
      }
    }
    if (const json* f = find(plan, "fringe")) {
      p.fringe = FringeParams{number(*f, "a", 0.0, "plan.fringe") * kPi,
                              number(*f, "b", 0.0, "plan.fringe"),
                              number(*f, "amplitude", cfg.nbar, "plan.fringe")};
    }
    p.validate();

    const json& cal = section(doc, "calibration");
    cfg.calibration.phases =
        find(cal, "phases") ? angles(*find(cal, "phases"), "calibration.phases")
                            : default_theta_grid();
    cfg.calibration.pulses = count(cal, "pulses", 200'000, "calibration");
    if (cfg.calibration.pulses == 0) {
      throw ConfigError("calibration.pulses must be >= 1");
    }
    cfg.calibration.seed = count(cal, "seed", p.seed, "calibration");
    cfg.calibration.grid_points = count(cal, "grid_points", 4096, "calibration");
    if (const json* files = find(cal, "pulse_files")) {
      if (!files->is_array()) throw ConfigError("calibration.pulse_files: expected a list");
      for (const auto& entry : *files) {
        const double phase = number(entry, "phase", -1.0, "calibration.pulse_files");
        if (!(phase >= 0.0 && phase <= 1.0)) {
          throw ConfigError("calibration.pulse_files.phase must lie in [0, 1]");
        }
        const json* path = find(entry, "path");
        if (path == nullptr) throw ConfigError("calibration.pulse_files.path missing");
        cfg.calibration.pulse_files.emplace_back(
            phase * kPi, path_value(*path, base_dir, "calibration.pulse_files.path"));
      }
    }

    const json& fisher = section(doc, "fisher");
    cfg.fisher.theta = find(fisher, "theta")
                           ? angles(*find(fisher, "theta"), "fisher.theta")
                           : p.theta_grid;
    cfg.fisher.d_theta = number(fisher, "d_theta", 1e-5 / kPi, "fisher") * kPi;
    if (!(cfg.fisher.d_theta > 0.0)) {
      throw ConfigError("fisher.d_theta must be positive");
    }
    cfg.fisher.p = count(fisher, "p", p.shots, "fisher");
    if (cfg.fisher.p == 0) throw ConfigError("fisher.p must be >= 1");

    const json& output = section(doc, "output");
    if (const json* dir = find(output, "dir")) {
      if (!dir->is_string()) throw ConfigError("output.dir: expected a path string");
      cfg.out_dir = dir->get<std::string>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

Config load_config(const fs::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

int cmd_calibrate(const CommonOptions& opts, std::ostream& out) {
  const Config cfg = resolve(opts);
  const Calibrated cal = calibrate(cfg);

  const auto& w = cal.weights;
  const auto& fallback = w.fallback_pairs();
  double worst = 2.0;
  Outcome worst_pair{};
  for (std::size_t i = 0; i < w.pair_count(); ++i) {
    const Outcome m = w.pair(i);
    if (std::find(fallback.begin(), fallback.end(), m) != fallback.end()) continue;
    if (w.weight(m, m) < worst) {
      worst = w.weight(m, m);
      worst_pair = m;
    }
  }

  OutputBundle bundle;
  std::ostringstream csv;
  write_calibration_csv(csv, cal.data);
  bundle.add(cfg.out_dir / "calibration.csv", csv.str());
  bundle.add(cfg.out_dir / "weights.json", dump(to_json(w)));
  bundle.add(cfg.out_dir / "fitted_channel.json", dump(to_json(cal.fitted)));
  json manifest = {{"kind", "calibrate"},
                   {"seed", cfg.calibration.seed},
                   {"version", std::string(library_version())},
                   {"config", cfg.document},
                   {"worst_diagonal", worst},
                   {"worst_pair", pair_name(worst_pair)}};
  std::vector<std::string> fallback_names;
  for (const auto& m : fallback) fallback_names.push_back(pair_name(m));
  manifest["fallback_pairs"] = fallback_names;
  bundle.add(cfg.out_dir / "calibrate_manifest.json", dump(manifest));
  bundle.commit();

  if (!opts.quiet) {
    for (const Outcome m : {Outcome{0, 0}, Outcome{0, 1}, Outcome{1, 1}, Outcome{0, 2}}) {
      out << "diagonal weight " << pair_name(m) << ": "
          << fixed(w.weight(m, m), 4) << "\n";
    }
    out << "worst diagonal weight: " << fixed(worst, 4) << " at "
        << pair_name(worst_pair) << "\n";
    if (!fallback.empty()) {
      out << "uniform fallback for " << fallback.size()
          << " unobserved measured pairs\n";
    }
    for (const auto& p : bundle.paths()) out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

int cmd_scan(const CommonOptions& opts, const std::string& kind,
             std::ostream& out) {
  if (kind != "bias" && kind != "sensitivity") {
    throw ConfigError("unknown scan kind '" + kind + "'");
  }
  Config cfg = resolve(opts);
  json provenance = json::object();
  prepare_noise(cfg, provenance);
  const ScanResult result =
      kind == "bias" ? bias_scan(cfg.plan) : sensitivity_scan(cfg.plan);

  OutputBundle bundle;
  std::ostringstream csv;
  write_scan_csv(csv, result);
  bundle.add(cfg.out_dir / (kind + "_scan.csv"), csv.str());
  if (kind == "sensitivity") {
    std::ostringstream curves;
    write_sensitivity_csv(curves, result);
    bundle.add(cfg.out_dir / "sensitivity_curves.csv", curves.str());
  }
  json manifest = run_manifest(result);
  manifest["config"] = cfg.document;
  manifest["noise_source"] = provenance;
  bundle.add(cfg.out_dir / (kind + "_manifest.json"), dump(manifest));
  bundle.commit();

  if (!opts.quiet) {
    const double root_p = std::sqrt(static_cast<double>(cfg.plan.shots));
    double worst_ratio = 0.0;
    const ScanRecord* worst = nullptr;
    for (const auto& r : result.records) {
      out << "theta/pi=" << fixed(r.theta / kPi, 3) << " " << to_string(r.estimator)
          << " mean/pi=" << fixed(r.mean_est / kPi, 5)
          << " bias=" << fixed(r.bias, 5) << " sd=" << fixed(r.sd_est, 5)
          << " dtheta=" << fixed(r.mean_dtheta, 5)
          << " sqrtp_dtheta=" << fixed(root_p * r.mean_dtheta, 4)
          << (r.degenerate ? " degenerate" : (r.unbiased ? "" : " BIASED")) << "\n";
      if (!r.degenerate && r.sd_est > 0.0) {
        const double ratio = std::abs(r.bias) / r.sd_est;
        if (ratio >= worst_ratio) {
          worst_ratio = ratio;
          worst = &r;
        }
      }
    }
    if (worst != nullptr) {
      out << "max |bias|/sigma_est: " << fixed(worst_ratio, 4) << " ("
          << to_string(worst->estimator) << " at theta/pi="
          << fixed(worst->theta / kPi, 3) << ")\n";
    }
    for (const auto& p : bundle.paths()) out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

int cmd_fisher(const CommonOptions& opts, std::ostream& out) {
  const Config cfg = resolve(opts);
  const InterferometerModel ideal(cfg.nbar, cfg.n_max);
  std::unique_ptr<ShotLikelihood> model;
  if (cfg.noise) {
    ConfusionModel channel = cfg.noise->fitted_channel_file
                                 ? confusion_from_json(read_json(*cfg.noise->fitted_channel_file))
                                 : cfg.noise->channel;
    model = std::make_unique<NoisyLikelihood>(std::move(channel), ideal);
  } else {
    model = std::make_unique<InterferometerModel>(ideal);
  }
  FisherOptions fo;
  fo.d_theta = cfg.fisher.d_theta;
  for (double theta : cfg.fisher.theta) {
    if (theta - fo.d_theta < 0.0 || theta + fo.d_theta > kPi) {
      throw ConfigError("fisher.theta must stay at least d_theta inside (0, 1)");
    }
  }
  const auto curve = fisher_curve(*model, cfg.fisher.theta, cfg.fisher.p, fo);

  OutputBundle bundle;
  std::ostringstream csv;
  write_fisher_csv(csv, curve);
  bundle.add(cfg.out_dir / "fisher.csv", csv.str());
  json manifest = {{"kind", "fisher"},
                   {"version", std::string(library_version())},
                   {"config", cfg.document}};
  bundle.add(cfg.out_dir / "fisher_manifest.json", dump(manifest));
  bundle.commit();

  if (!opts.quiet) {
    for (const auto& pt : curve) {
      out << "theta/pi=" << fixed(pt.theta / kPi, 3)
          << " fisher=" << fixed(pt.fisher, 6) << " crlb=" << fixed(pt.crlb, 6)
          << "\n";
    }
    for (const auto& p : bundle.paths()) out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

int cmd_posterior(const CommonOptions& opts, const fs::path& pulses,
                  std::ostream& out) {
  Config cfg = resolve(opts);
  const OutcomeSequence outcomes = read_pulse_csv(pulses);
  if (outcomes.empty()) throw ConfigError(pulses.string() + ": no pulses");
  json provenance = json::object();
  prepare_noise(cfg, provenance);
  EstimationContext ctx(cfg.plan);
  const Posterior post = ctx.posterior(outcomes);
  const EstimationResult estimates = ctx.evaluate(outcomes);

  OutputBundle bundle;
  std::ostringstream csv;
  write_posterior_csv(csv, post);
  bundle.add(cfg.out_dir / "posterior.csv", csv.str());
  json est = json::object();
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    est[std::string(to_string(cfg.plan.estimators[k]))] = {
        {"estimate", estimates[k].estimate / kPi}, {"dtheta", estimates[k].delta}};
  }
  json manifest = {{"kind", "posterior"},
                   {"version", std::string(library_version())},
                   {"pulses", pulses.string()},
                   {"estimates", est},
                   {"noise_source", provenance},
                   {"config", cfg.document}};
  bundle.add(cfg.out_dir / "posterior_manifest.json", dump(manifest));
  bundle.commit();

  if (!opts.quiet) {
    out << "pulses: " << outcomes.size() << "\n";
    for (std::size_t k = 0; k < estimates.size(); ++k) {
      out << to_string(cfg.plan.estimators[k])
          << " estimate/pi=" << fixed(estimates[k].estimate / kPi, 5)
          << " dtheta=" << fixed(estimates[k].delta, 5) << "\n";
    }
    for (const auto& p : bundle.paths()) out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Bayesian phase estimation for a Mach-Zehnder interferometer",
               "mzphase"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  CommonOptions opts;
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config, "JSON configuration file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the master seed");
  auto* dir_opt = app.add_option("--out-dir", out_dir, "Output directory");
  app.add_flag("--quiet", opts.quiet, "Suppress standard output");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit detector weights");
  auto* scan_cmd = app.add_subcommand("scan", "Run a bias or sensitivity scan");
  std::string kind;
  scan_cmd->add_option("kind", kind, "bias | sensitivity")
      ->required()
      ->check(CLI::IsMember({"bias", "sensitivity"}));
  auto* fisher_cmd = app.add_subcommand("fisher", "Fisher information curve");
  auto* posterior_cmd =
      app.add_subcommand("posterior", "Posterior of a recorded pulse file");
  std::string pulses;
  posterior_cmd->add_option("--pulses", pulses, "CSV pulse_index,nc,nd")
      ->required();
  for (auto* sub : {calibrate_cmd, scan_cmd, fisher_cmd, posterior_cmd}) {
    sub->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  opts.config = config;
  if (seed_opt->count() > 0) opts.seed = seed;
  if (dir_opt->count() > 0) opts.out_dir = fs::path(out_dir);

  try {
    if (calibrate_cmd->parsed()) return cmd_calibrate(opts, out);
    if (scan_cmd->parsed()) return cmd_scan(opts, kind, out);
    if (fisher_cmd->parsed()) return cmd_fisher(opts, out);
    return cmd_posterior(opts, pulses, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DegenerateEvidenceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace mzphase::cli
