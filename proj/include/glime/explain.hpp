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
#include <optional>
#include <string>
#include <variant>

#include "glime/feature_space.hpp"
#include "glime/models.hpp"
#include "glime/types.hpp"
#include "json.hpp"

namespace glime {

// Binary-mask LIME with exponential kernel. `weighted = false` replaces the
// kernel by unit weights (an ablation, not the reference method).
struct Lime {
  double sigma = 0.25;
  bool weighted = true;
};
struct GlimeBinomial {
  double sigma = 0.25;
};
struct GlimeGauss {
  double sigma = 1.0;
};
struct GlimeLaplace {
  double sigma = 1.0;
};
struct GlimeUniform {
  double sigma = 1.0;
};
struct KernelShap {
  bool exact = true;
};
struct SmoothGrad {
  double sigma = 1.0;
};

using MethodSpec = std::variant<Lime, GlimeBinomial, GlimeGauss, GlimeLaplace, GlimeUniform,
                                KernelShap, SmoothGrad>;

std::string method_name(const MethodSpec& method);
std::optional<double> method_sigma(const MethodSpec& method);
bool is_binary_method(const MethodSpec& method);
nlohmann::json method_to_json(const MethodSpec& method);
MethodSpec method_from_json(const nlohmann::json& j);

struct ExplainRequest {
  ModelSpec model;
  Vector x;
  Segmentation segmentation;
  std::optional<Reference> reference;  // required by binary methods
  MethodSpec method;
  Eigen::Index n = 1000;
  double lambda = 1.0;
  std::uint64_t seed = 0;
};

struct Explanation {
  Vector w;
  double intercept = 0.0;
  double r2 = 0.0;
  MethodSpec method;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int d = 0;
};

// Dispatches on request.method.
Explanation explain(const ExplainRequest& request);

// Uniform masks, exponential kernel weights, weighted ridge with intercept.
Explanation explain_lime(const ExplainRequest& request);

// Unit-weight ridge under the method's sampling law: binary masks for
// GlimeBinomial, additive per-feature offsets for the continuous variants.
// Continuous variants never read the reference.
Explanation explain_glime(const ExplainRequest& request);

// Shapley-kernel weighted least squares with intercept and lambda = 0. Exact
// mode enumerates every proper coalition (d <= 20); sampled mode keeps the
// first n uniform masks that are neither empty nor full.
Explanation explain_kernelshap(const ExplainRequest& request);

// (1 / sigma^2) mean_i z_i f(x + z_i), z_i ~ N(0, sigma^2 I), on raw features.
Vector smoothgrad_estimate(const ModelSpec& model, const Vector& x, double sigma, Eigen::Index n,
                           std::uint64_t seed);

struct LinearLimit {
  Vector w;
  double intercept = 0.0;
};

// n -> infinity explanation of f(z) = c^T z + bias under binary masks:
// w_j = sum_{i in j} c_i (x_i - r_i), intercept = bias + c^T r. The limit
// does not depend on sigma.
LinearLimit infinite_limit_linear_binomial(const Vector& coefficients, double bias,
                                           const Vector& x, const Reference& reference,
                                           const Segmentation& seg, double sigma);

// Same limit under additive per-feature offsets: w_j = sum_{i in j} c_i,
// intercept = bias + c^T x.
LinearLimit infinite_limit_linear_gauss(const Vector& coefficients, double bias, const Vector& x,
                                        const Segmentation& seg);

nlohmann::json explanation_to_json(const Explanation& e);
Explanation explanation_from_json(const nlohmann::json& j);

}  // namespace glime
