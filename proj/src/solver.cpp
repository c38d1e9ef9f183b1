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


#include "glime/solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "glime/error.hpp"

namespace glime {

namespace {

void validate(const RidgeProblem& p) {
  const Eigen::Index n = p.design.rows();
  if (n < 1 || p.design.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "ridge problem needs n >= 1 and d >= 1");
  }
  if (p.responses.size() != n || p.sample_weights.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "responses and weights must have one entry per row");
  }
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  if (!(p.sample_weights.array() > 0.0).all() || !p.sample_weights.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "sample weights must be finite and positive");
  }
  if (!p.design.allFinite() || !p.responses.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "design and responses must be finite");
  }
}

}  // namespace

RidgeSolution solve_weighted_ridge(const RidgeProblem& problem) {
  validate(problem);
  const Eigen::Index d = problem.design.cols();
  const Vector& pi = problem.sample_weights;

  Eigen::RowVectorXd z_mean = Eigen::RowVectorXd::Zero(d);
  double y_mean = 0.0;
  if (problem.fit_intercept) {
    const double total = pi.sum();
    z_mean = (pi.transpose() * problem.design) / total;
    y_mean = pi.dot(problem.responses) / total;
  }
  const Matrix centered = problem.design.rowwise() - z_mean;
  const Vector y_centered = problem.responses.array() - y_mean;
  const Matrix weighted = centered.array().colwise() * pi.array();

  Matrix gram = centered.transpose() * weighted;
  gram.diagonal().array() += problem.lambda;
  const Vector rhs = weighted.transpose() * y_centered;

  if (problem.lambda == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double tolerance =
        static_cast<double>(d) * std::numeric_limits<double>::epsilon() * largest * 16.0;
    if (largest == 0.0 || eig.eigenvalues().minCoeff() <= tolerance) {
      throw Error(ErrorCode::kSingularSystem,
                  "centered Gram matrix is rank deficient; use lambda > 0 or more samples");
    }
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem,
                "Gram matrix is not positive definite; use lambda > 0 or more samples");
  }

  RidgeSolution solution;
  solution.w = llt.solve(rhs);
  solution.intercept = problem.fit_intercept ? y_mean - z_mean.dot(solution.w) : 0.0;
  const RSquared r2 = r_squared(problem, solution);
  solution.r2 = r2.value;
  solution.degenerate_variance = r2.degenerate_variance;
  return solution;
}

RSquared r_squared(const RidgeProblem& problem, const RidgeSolution& solution) {
  const Vector& pi = problem.sample_weights;
  const double y_mean = pi.dot(problem.responses) / pi.sum();
  const Vector predicted = (problem.design * solution.w).array() + solution.intercept;
  const double residual = pi.dot((problem.responses - predicted).cwiseAbs2());
  const double total = pi.dot((problem.responses.array() - y_mean).matrix().cwiseAbs2());
  if (total == 0.0) return RSquared{0.0, true};
  return RSquared{1.0 - residual / total, false};
}

SecondMoments analytic_moments(const DistributionSpec& dist, const WeightSpec& wspec) {
  validate(dist);
  validate(wspec);
  const int d = dimension(dist);
  if (std::holds_alternative<UniformBinary>(dist)) {
    if (const auto* kernel = std::get_if<ExpKernel>(&wspec)) {
      // log((1 + e^{-1/s^2})^m / 2^d)
      const double base = std::log1p(std::exp(-1.0 / (kernel->sigma * kernel->sigma)));
      const double log_half = d * std::numbers::ln2;
      return SecondMoments{std::exp((d - 1) * base - log_half),
                           std::exp((d - 2) * base - log_half)};
    }
  } else if (const auto* b = std::get_if<Binomial>(&dist)) {
    if (std::holds_alternative<UnitWeight>(wspec)) {
      const double p = binomial_inclusion_probability(b->sigma);
      return SecondMoments{p, p * p};
    }
  } else if (const auto* g = std::get_if<Gaussian>(&dist)) {
    if (std::holds_alternative<UnitWeight>(wspec)) {
      return SecondMoments{g->sigma * g->sigma, 0.0};
    }
  }
  throw Error(ErrorCode::kUnsupportedCombination,
              "no closed-form moments for this distribution/weighting pair");
}

InverseParams sherman_morrison_inverse(double alpha1, double alpha2, double lambda, int d) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  const double diag = alpha1 + lambda - alpha2;
  const double full = alpha1 + lambda + (d - 1) * alpha2;
  if (!(diag > 0.0) || !(full > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "alpha1 + lambda - alpha2 and alpha1 + lambda + (d-1) alpha2 must be positive");
  }
  const double denom = diag * full;
  return InverseParams{(alpha1 + lambda + (d - 2) * alpha2) / denom, -alpha2 / denom};
}

CovarianceModel::CovarianceModel(double alpha1, double alpha2, double lambda, int d)
    : alpha1_(alpha1),
      alpha2_(alpha2),
      lambda_(lambda),
      d_(d),
      inverse_(sherman_morrison_inverse(alpha1, alpha2, lambda, d)) {}

Matrix CovarianceModel::regularized() const {
  Matrix m = Matrix::Constant(d_, d_, alpha2_);
  m.diagonal().array() = alpha1_ + lambda_;
  return m;
}

Matrix CovarianceModel::inverse() const {
  Matrix m = Matrix::Constant(d_, d_, inverse_.beta2);
  m.diagonal().array() = inverse_.beta1;
  return m;
}

}  // namespace glime
