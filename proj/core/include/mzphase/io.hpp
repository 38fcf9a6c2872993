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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mzphase {

/// Shortest round-trip decimal form ("%.17g" trimmed); "nan"/"inf" for
/// non-finite values.
std::string format_number(double value);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

/// Staged multi-file output: nothing reaches disk until commit(), which
/// writes every file atomically.
class OutputBundle {
 public:
  void add(std::filesystem::path path, std::string contents);
  void commit() const;
  const std::vector<std::filesystem::path>& paths() const noexcept {
    return paths_;
  }

 private:
  std::vector<std::filesystem::path> paths_;
  std::vector<std::string> contents_;
};

std::string read_file(const std::filesystem::path& path);

/// Minimal comma-separated reader: header row plus numeric rows. Throws
/// FormatError when the header does not match `expected_header`.
std::vector<std::vector<double>> read_numeric_csv(
    const std::filesystem::path& path,
    const std::vector<std::string>& expected_header);

}  // namespace mzphase
