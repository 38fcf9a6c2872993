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

#include <cstddef>
#include <span>
#include <vector>

namespace mzphase {

/// Row-major dense matrix; just enough structure for small least-squares
/// problems without exposing a linear-algebra library in public headers.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Numerical rank via column-pivoted QR.
std::size_t matrix_rank(const DenseMatrix& a, double relative_threshold = 1e-10);

struct NnlsResult {
  std::vector<double> x;
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solution of min ||A x - b|| subject to x >= 0.
NnlsResult nnls(const DenseMatrix& a, std::span<const double> b);

}  // namespace mzphase
