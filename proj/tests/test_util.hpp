// Copyright 2026 The GLIME Authors. All Rights Reserved.
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


// Independent reference computations shared by the test binaries. Nothing
// here calls into the solver or explainer code paths it is used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace glime::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

// Weighted ridge through the augmented normal equations [1 Z]^T P [1 Z],
// penalty on every coordinate but the intercept, solved by full-pivot LU.
struct NormalEquationSolution {
  Eigen::VectorXd w;
  double intercept;
};

inline NormalEquationSolution normal_equation_ridge(const Eigen::MatrixXd& design,
                                                    const Eigen::VectorXd& y,
                                                    const Eigen::VectorXd& weights, double lambda,
                                                    bool fit_intercept) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  const Eigen::Index off = fit_intercept ? 1 : 0;
  Eigen::MatrixXd x(n, d + off);
  if (fit_intercept) x.col(0).setOnes();
  x.rightCols(d) = design;
  Eigen::MatrixXd a = x.transpose() * weights.asDiagonal() * x;
  for (Eigen::Index j = off; j < d + off; ++j) a(j, j) += lambda;
  const Eigen::VectorXd b = x.transpose() * weights.asDiagonal() * y;
  const Eigen::VectorXd beta = a.fullPivLu().solve(b);
  return {beta.tail(d), fit_intercept ? beta(0) : 0.0};
}

// Shapley values of a d-player game by the permutation-weight formula over
// all 2^d coalitions. `value` receives the coalition as a 0/1 vector.
inline Eigen::VectorXd brute_force_shapley(int d,
                                           const std::function<double(const Eigen::VectorXd&)>& value) {
  const std::uint64_t total = std::uint64_t{1} << d;
  std::vector<double> v(total);
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    Eigen::VectorXd mask(d);
    for (int j = 0; j < d; ++j) mask(j) = static_cast<double>((bits >> j) & 1U);
    v[bits] = value(mask);
  }
  std::vector<double> factorial(d + 1, 1.0);
  for (int i = 1; i <= d; ++i) factorial[i] = factorial[i - 1] * i;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) {
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      if ((bits >> i) & 1U) continue;
      const int s = __builtin_popcountll(bits);
      const double w = factorial[s] * factorial[d - s - 1] / factorial[d];
      phi(i) += w * (v[bits | (std::uint64_t{1} << i)] - v[bits]);
    }
  }
  return phi;
}

}  // namespace glime::testing
