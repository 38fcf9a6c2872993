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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mzphase/detector.hpp"
#include "mzphase/experiment.hpp"

namespace mzphase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Invalid or unreadable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationSection {
  /// Calibration phases in radians.
  std::vector<double> phases;
  std::uint64_t pulses = 200'000;
  std::uint64_t seed = 0;
  /// Recorded pulses per known phase (radians). Replaces simulation when
  /// non-empty.
  std::vector<std::pair<double, std::filesystem::path>> pulse_files;
  std::size_t grid_points = 4096;
};

struct NoiseSection {
  ConfusionModel channel;
  std::optional<std::filesystem::path> weights_file;
  std::optional<std::filesystem::path> fitted_channel_file;
};

struct FisherSection {
  std::vector<double> theta;
  double d_theta = 1e-5;
  std::uint64_t p = 1000;
};

/// Parsed configuration document. Angles are stored in radians; the file
/// uses units of pi.
struct Config {
  nlohmann::json document;
  std::filesystem::path base_dir;
  double nbar = 1.08;
  std::uint32_t n_max = 25;
  std::optional<NoiseSection> noise;
  CalibrationSection calibration;
  ExperimentPlan plan;
  FisherSection fisher;
  std::filesystem::path out_dir = "out";
};

Config parse_config(const nlohmann::json& document,
                    const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  bool quiet = false;
};

int cmd_calibrate(const CommonOptions& opts, std::ostream& out);
int cmd_scan(const CommonOptions& opts, const std::string& kind,
             std::ostream& out);
int cmd_fisher(const CommonOptions& opts, std::ostream& out);
int cmd_posterior(const CommonOptions& opts,
                  const std::filesystem::path& pulses, std::ostream& out);

/// Full command line, including the program name in args[0].
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mzphase::cli
