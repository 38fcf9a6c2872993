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

#include "mzphase/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gtest/gtest.h"
#include "mzphase/errors.hpp"

using namespace mzphase;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / "mzphase_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(AtomicWrite, ReplacesContents) {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  fs::remove(path);
}

TEST(OutputBundle, CommitsEverything) {
  OutputBundle bundle;
  bundle.add(scratch("a.csv"), "a\n");
  bundle.add(scratch("b.json"), "{}");
  EXPECT_FALSE(fs::exists(scratch("a.csv")));
  bundle.commit();
  EXPECT_EQ(read_file(scratch("a.csv")), "a\n");
  EXPECT_EQ(bundle.paths().size(), 2u);
  fs::remove_all(scratch("a.csv").parent_path());
}

TEST(ReadFile, MissingFileFails) {
  EXPECT_THROW(read_file(scratch("missing.txt")), FormatError);
}

TEST(NumericCsv, ParsesAndValidatesHeader) {
  const auto path = scratch("n.csv");
  {
    std::ofstream f(path);
    f << "x,y\n1,2.5\n-3,nan\n";
  }
  const auto rows = read_numeric_csv(path, {"x", "y"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], 2.5);
  EXPECT_TRUE(std::isnan(rows[1][1]));
  EXPECT_THROW(read_numeric_csv(path, {"x", "z"}), FormatError);
  {
    std::ofstream f(path);
    f << "x,y\n1,abc\n";
  }
  EXPECT_THROW(read_numeric_csv(path, {"x", "y"}), FormatError);
  {
    std::ofstream f(path);
    f << "x,y\n1\n";
  }
  EXPECT_THROW(read_numeric_csv(path, {"x", "y"}), FormatError);
  fs::remove_all(path.parent_path());
}
