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

#include <cstdint>
#include <variant>

#include "glime/types.hpp"
#include "json.hpp"

namespace glime {

// Perturbation laws over the d interpretable features. The three continuous
// laws are parameterized so each coordinate has variance sigma^2:
// Laplace scale sigma/sqrt(2), uniform support [-sqrt(3) sigma, sqrt(3) sigma].
struct UniformBinary {
  int d = 0;
};
struct Binomial {
  int d = 0;
  double sigma = 1.0;
};
struct Gaussian {
  int d = 0;
  double sigma = 1.0;
};
struct Laplace {
  int d = 0;
  double sigma = 1.0;
};
struct UniformBox {
  int d = 0;
  double sigma = 1.0;
};

using DistributionSpec = std::variant<UniformBinary, Binomial, Gaussian, Laplace, UniformBox>;

struct ExpKernel {
  double sigma = 1.0;
};
struct ShapKernel {};
struct UnitWeight {};

using WeightSpec = std::variant<ExpKernel, ShapKernel, UnitWeight>;

// Throws kInvalidArgument on d < 1 or non-positive sigma.
void validate(const DistributionSpec& dist);
void validate(const WeightSpec& wspec);
int dimension(const DistributionSpec& dist);

// P(z_i = 1) = 1 / (1 + exp(-1/sigma^2)) for the weight-absorbing binary law.
double binomial_inclusion_probability(double sigma);

// n x d matrix of i.i.d. draws, a pure function of (dist, n, seed). Samples
// are generated row by row, so a draw of n rows is a prefix of a larger draw
// with the same seed.
Matrix draw(const DistributionSpec& dist, Eigen::Index n, std::uint64_t seed);

double log_weight(const WeightSpec& wspec, const Vector& zprime);
// ExpKernel: exp((k - d) / sigma^2) with k = ||z'||_0, floored at the smallest
// normal double so it stays strictly positive. ShapKernel:
// (d - 1) / (C(d, k) k (d - k)); throws kShapDegenerate for k in {0, d}.
double weight(const WeightSpec& wspec, const Vector& zprime);

// pmf of ||z'||_0 under the Binomial law: C(d,k) e^{k/s^2} / (1 + e^{1/s^2})^d.
double binomial_log_pmf(int d, double sigma, int k);
double binomial_pmf(int d, double sigma, int k);

// E[pi(z')] for z' ~ Uniform({0,1}^d) under ExpKernel(sigma):
// ((1 + e^{-1/sigma^2}) / 2)^d.
double expected_weight_uniform(int d, double sigma);

double log_binomial_coefficient(int n, int k);

std::uint64_t splitmix64(std::uint64_t x);
// Seed for replicate r of a run with master seed s: splitmix64(s ^ r).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t replicate);

nlohmann::json distribution_to_json(const DistributionSpec& dist);
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json weight_to_json(const WeightSpec& wspec);
WeightSpec weight_from_json(const nlohmann::json& j);

}  // namespace glime
