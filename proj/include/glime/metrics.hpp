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
#include <span>
#include <string>
#include <vector>

#include "glime/explain.hpp"
#include "glime/feature_space.hpp"
#include "glime/models.hpp"
#include "glime/types.hpp"

namespace glime {

struct StabilityReport {
  int k = 0;
  double mean_jaccard = 0.0;
  std::vector<double> pair_values;  // unordered pairs (i < j), row-major
  int n_seeds = 0;
};

// Indices of the k largest entries of w, ties going to the lower index.
// With use_abs the ranking is by |w|.
std::vector<int> top_k_indices(const Vector& w, int k, bool use_abs = false);
double jaccard_index(const std::vector<int>& a, const std::vector<int>& b);

StabilityReport top_k_jaccard(std::span<const Explanation> explanations, int k,
                              bool use_abs = false);
StabilityReport top_k_jaccard(std::span<const Vector> attributions, int k, bool use_abs = false);

enum class BallNorm { kL1, kL2, kLinf };

std::string norm_name(BallNorm norm);
BallNorm norm_from_name(const std::string& name);
double ball_norm(const Vector& v, BallNorm norm);

// m points uniform in {z : ||z - x|| <= epsilon}. epsilon = 0 returns copies of x.
Matrix sample_ball(const Vector& x, double epsilon, BallNorm norm, Eigen::Index m,
                   std::uint64_t seed);

struct FidelityReport {
  double epsilon = 0.0;
  BallNorm norm = BallNorm::kL2;
  double fidelity = 1.0;
  double mse = 0.0;
  Eigen::Index m = 0;
};

// 1 / (1 + mean_i (f(z_i) - b - w^T u_i)^2) where u_i is the per-feature mean
// of z_i - x. Explanations from binary methods are scored the same way.
FidelityReport local_fidelity(const ModelSpec& model, const Vector& x,
                              const Explanation& explanation, const Segmentation& seg,
                              double epsilon, BallNorm norm, Eigen::Index m, std::uint64_t seed);

struct DistanceReport {
  double mse = 0.0;
  double mae = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  // Either input is constant; correlations are reported as 0.
  bool degenerate_variance = false;
};

DistanceReport explanation_distance(const Vector& w1, const Vector& w2);
DistanceReport explanation_distance(const Explanation& e1, const Explanation& e2);

}  // namespace glime
