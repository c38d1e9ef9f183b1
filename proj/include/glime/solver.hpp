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


#pragma once

#include "glime/sampling.hpp"
#include "glime/types.hpp"

namespace glime {

// Minimizes sum_i pi_i (y_i - b - w^T z_i)^2 + lambda ||w||^2. The intercept
// is never penalized; lambda is taken as given, with no rescaling by n.
struct RidgeProblem {
  Matrix design;          // n x d, one perturbation per row
  Vector responses;       // n
  Vector sample_weights;  // n, strictly positive
  double lambda = 1.0;
  bool fit_intercept = true;
};

struct RidgeSolution {
  Vector w;
  double intercept = 0.0;
  double r2 = 0.0;
  bool degenerate_variance = false;
};

// Weighted centering followed by a Cholesky solve of the d x d system
// (Zc^T P Zc + lambda I) w = Zc^T P yc. Throws kSingularSystem when lambda is
// zero and the centered Gram matrix is rank deficient; there is no
// pseudo-inverse fallback.
RidgeSolution solve_weighted_ridge(const RidgeProblem& problem);

struct RSquared {
  double value = 0.0;
  // Set when the weighted response variance is zero; value is then 0.
  bool degenerate_variance = false;
};

RSquared r_squared(const RidgeProblem& problem, const RidgeSolution& solution);

// Infinite-sample second moments of a (distribution, weighting) pair:
// E[pi z_j^2] = alpha1 and E[pi z_j z_k] = alpha2 for j != k.
struct SecondMoments {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

// Supported pairs: UniformBinary with ExpKernel, Binomial with UnitWeight,
// Gaussian with UnitWeight. Anything else throws kUnsupportedCombination.
SecondMoments analytic_moments(const DistributionSpec& dist, const WeightSpec& wspec);

// (Sigma + lambda I)^{-1} = (beta1 - beta2) I + beta2 11^T, where
// Sigma = (alpha1 - alpha2) I + alpha2 11^T.
struct InverseParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

InverseParams sherman_morrison_inverse(double alpha1, double alpha2, double lambda, int d);

class CovarianceModel {
 public:
  CovarianceModel(double alpha1, double alpha2, double lambda, int d);

  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  double lambda() const { return lambda_; }
  int d() const { return d_; }
  double beta1() const { return inverse_.beta1; }
  double beta2() const { return inverse_.beta2; }

  // Dense Sigma + lambda I and its closed-form inverse.
  Matrix regularized() const;
  Matrix inverse() const;

 private:
  double alpha1_;
  double alpha2_;
  double lambda_;
  int d_;
  InverseParams inverse_;
};

}  // namespace glime
