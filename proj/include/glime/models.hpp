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

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "glime/types.hpp"
#include "json.hpp"

namespace glime {

struct LinearModel {
  Vector coefficients;
  double bias = 0.0;
};

// f(x) = x^T A x + c^T x + b. The matrix is symmetrized on construction.
class QuadraticModel {
 public:
  QuadraticModel(const Matrix& matrix, Vector coefficients, double bias);

  const Matrix& matrix() const { return matrix_; }
  const Vector& coefficients() const { return coefficients_; }
  double bias() const { return bias_; }

 private:
  Matrix matrix_;
  Vector coefficients_;
  double bias_;
};

struct DenseLayer {
  Matrix weights;  // outputs x inputs
  Vector bias;
};

// Fixed-weight perceptron: tanh after every hidden layer, identity on the
// final layer, which must have a single output.
struct MlpModel {
  std::vector<DenseLayer> layers;
};

struct RemoteModel {
  std::string endpoint;  // http://host[:port]/path
  Eigen::Index input_dim = 0;
  int timeout_ms = 5000;
  int batch_size = 256;
  int retries = 0;
};

using ModelSpec = std::variant<LinearModel, QuadraticModel, MlpModel, RemoteModel>;

Eigen::Index input_dim(const ModelSpec& model);

// Applies the model to each row of `points` (n x D). Builtin models are pure
// and deterministic; the remote adapter posts `batch_size` rows at a time.
// The bounded-output assumption |f| <= 1 used by the concentration results is
// not enforced here.
Vector evaluate(const ModelSpec& model, const Matrix& points);

// Analytic for Linear/Quadratic, central differences (h = 1e-5) for Mlp.
Vector gradient(const ModelSpec& model, const Vector& point);

ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec load_model(const std::string& path);

}  // namespace glime
