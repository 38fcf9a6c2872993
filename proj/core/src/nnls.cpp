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

#include "mzphase/nnls.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mzphase/errors.hpp"

namespace mzphase {

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
  }
  return m;
}

}  // namespace

std::size_t matrix_rank(const DenseMatrix& a, double relative_threshold) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(to_eigen(a));
  qr.setThreshold(relative_threshold);
  return static_cast<std::size_t>(qr.rank());
}

NnlsResult nnls(const DenseMatrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw DomainError("nnls: dimension mismatch");
  const Eigen::MatrixXd A = to_eigen(a);
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(),
                                              static_cast<Eigen::Index>(b.size()));
  const Eigen::Index n = A.cols();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     A.norm() * std::max<Eigen::Index>(A.rows(), n);
  const std::size_t max_iter = 3 * static_cast<std::size_t>(n) + 10;

  NnlsResult result;
  Eigen::VectorXd w = A.transpose() * (rhs - A * x);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    }
    const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(rhs);
    z.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      z(idx[k]) = sol(static_cast<Eigen::Index>(k));
    }
  };

  while (result.iterations < max_iter) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) {
      result.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z;
    while (true) {
      ++result.iterations;
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && std::abs(x(j)) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
      if (result.iterations >= max_iter) break;
    }
    w = A.transpose() * (rhs - A * x);
  }

  result.x.assign(x.data(), x.data() + n);
  for (auto& v : result.x) v = std::max(v, 0.0);
  result.residual_norm = (A * x - rhs).norm();
  return result;
}

}  // namespace mzphase
