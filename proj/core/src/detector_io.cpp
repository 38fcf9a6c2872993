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

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <regex>
#include <string>

#include "mzphase/detector.hpp"
#include "mzphase/errors.hpp"
#include "mzphase/io.hpp"

namespace mzphase {

namespace {

std::string pair_key(Outcome o) {
  return "(" + std::to_string(o.n_c) + "," + std::to_string(o.n_d) + ")";
}

Outcome parse_pair_key(const std::string& key) {
  static const std::regex pattern(R"(^\(\s*(\d+)\s*,\s*(\d+)\s*\)$)");
  std::smatch match;
  if (!std::regex_match(key, match, pattern)) {
    throw FormatError("bad count pair key '" + key + "'");
  }
  return {static_cast<std::uint32_t>(std::stoul(match[1].str())),
          static_cast<std::uint32_t>(std::stoul(match[2].str()))};
}

std::uint32_t to_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 4.0e9) {
    throw FormatError(std::string(what) + " must be a non-negative integer");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

nlohmann::json to_json(const ConfusionModel& model) {
  return {{"n_max", model.n_max()},
          {"forward_c", model.forward_c()},
          {"forward_d", model.forward_d()}};
}

ConfusionModel confusion_from_json(const nlohmann::json& j) {
  try {
    const auto n_max = j.at("n_max").get<std::uint32_t>();
    return ConfusionModel(n_max, j.at("forward_c").get<ChannelMatrix>(),
                          j.at("forward_d").get<ChannelMatrix>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("confusion model: ") + e.what());
  }
}

nlohmann::json to_json(const RetrodictiveWeights& weights) {
  nlohmann::json table = nlohmann::json::object();
  for (std::size_t mi = 0; mi < weights.pair_count(); ++mi) {
    const Outcome m = weights.pair(mi);
    const auto dist = weights.distribution(m);
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t ti = 0; ti < dist.size(); ++ti) {
      if (dist[ti] > 0.0) row[pair_key(weights.pair(ti))] = dist[ti];
    }
    table[pair_key(m)] = std::move(row);
  }
  return {{"weights", std::move(table)}};
}

RetrodictiveWeights weights_from_json(const nlohmann::json& j) {
  try {
    const auto& table = j.at("weights");
    if (!table.is_object() || table.empty()) {
      throw FormatError("weights: expected a non-empty object");
    }
    std::uint32_t n_max = 0;
    for (const auto& [key, row] : table.items()) {
      const Outcome m = parse_pair_key(key);
      n_max = std::max({n_max, m.n_c, m.n_d});
      for (const auto& [true_key, w] : row.items()) {
        const Outcome t = parse_pair_key(true_key);
        n_max = std::max({n_max, t.n_c, t.n_d});
      }
    }
    RetrodictiveWeights weights(n_max);
    for (const auto& [key, row] : table.items()) {
      std::vector<double> dist(weights.pair_count(), 0.0);
      for (const auto& [true_key, w] : row.items()) {
        dist[weights.index(parse_pair_key(true_key))] = w.get<double>();
      }
      weights.set_distribution(parse_pair_key(key), std::move(dist));
    }
    return weights;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weights: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("weights: ") + e.what());
  }
}

void write_calibration_csv(std::ostream& out, const CalibrationData& calib) {
  out << "phi,nc,nd,count\n";
  for (std::size_t j = 0; j < calib.phases.size(); ++j) {
    const std::string phi = format_number(calib.phases[j] / std::numbers::pi);
    for (std::uint32_t nc = 0; nc <= calib.n_max; ++nc) {
      for (std::uint32_t nd = 0; nd <= calib.n_max; ++nd) {
        out << phi << ',' << nc << ',' << nd << ','
            << calib.count(j, {nc, nd}) << '\n';
      }
    }
  }
}

CalibrationData read_calibration_csv(const std::filesystem::path& path,
                                     double nbar, std::uint32_t n_max) {
  const auto rows = read_numeric_csv(path, {"phi", "nc", "nd", "count"});
  CalibrationData calib;
  calib.nbar = nbar;
  calib.n_max = n_max;
  const std::size_t dim = n_max + 1;
  std::map<double, std::size_t> phase_index;
  for (const auto& row : rows) {
    const double phi = row[0] * std::numbers::pi;
    require_phase(phi);
    auto [it, inserted] = phase_index.try_emplace(row[0], calib.phases.size());
    if (inserted) {
      calib.phases.push_back(phi);
      calib.counts.emplace_back(dim * dim, 0);
    }
    const Outcome o{std::min(to_count(row[1], "nc"), n_max),
                    std::min(to_count(row[2], "nd"), n_max)};
    const double count = row[3];
    if (!(count >= 0.0) || count != std::floor(count)) {
      throw FormatError(path.string() + ": count must be a non-negative integer");
    }
    calib.counts[it->second][calib.index(o)] +=
        static_cast<std::uint64_t>(count);
  }
  if (calib.phases.empty()) throw FormatError(path.string() + ": no rows");
  return calib;
}

OutcomeSequence read_pulse_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, {"pulse_index", "nc", "nd"});
  OutcomeSequence pulses;
  pulses.reserve(rows.size());
  for (const auto& row : rows) {
    pulses.push_back({to_count(row[1], "nc"), to_count(row[2], "nd")});
  }
  return pulses;
}

void write_pulse_csv(std::ostream& out, std::span<const Outcome> pulses) {
  out << "pulse_index,nc,nd\n";
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    out << i << ',' << pulses[i].n_c << ',' << pulses[i].n_d << '\n';
  }
}

CalibrationData calibration_from_pulse_files(
    const std::vector<std::pair<double, std::filesystem::path>>& files,
    double nbar, std::uint32_t n_max) {
  CalibrationData calib;
  calib.nbar = nbar;
  calib.n_max = n_max;
  const std::size_t dim = n_max + 1;
  for (const auto& [phi, path] : files) {
    require_phase(phi);
    std::vector<std::uint64_t> h(dim * dim, 0);
    for (const auto& o : read_pulse_csv(path)) {
      ++h[calib.index({std::min(o.n_c, n_max), std::min(o.n_d, n_max)})];
    }
    calib.phases.push_back(phi);
    calib.counts.push_back(std::move(h));
  }
  return calib;
}

}  // namespace mzphase
