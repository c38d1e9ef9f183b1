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
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glime/explain.hpp"
#include "glime/feature_space.hpp"
#include "glime/metrics.hpp"
#include "glime/models.hpp"
#include "json.hpp"

namespace glime {

struct SingletonSegments {};
struct GridSegments {
  int rows = 1;
  int cols = 1;
};
using SegmentationSpec = std::variant<SingletonSegments, GridSegments>;

struct MeanReference {};
struct ConstantReference {
  double value = 0.0;
};
struct ExplicitReference {
  Vector values;
};
using ReferenceSpec = std::variant<MeanReference, ConstantReference, ExplicitReference>;

// "raw": lambda enters the objective sum_i pi_i r_i^2 + lambda ||w||^2 as is.
// "per_sample": the objective is averaged over samples, i.e. lambda * n is
// passed to the solver.
enum class LambdaConvention { kRaw, kPerSample };

enum class OutputFormat { kCsv, kJson };

// A method kind with either a fixed sigma or one taken from the sigma grid.
struct MethodEntry {
  std::string kind;
  std::optional<double> sigma;
};

struct ExperimentConfig {
  ModelSpec model = LinearModel{};
  std::vector<InputArray> inputs;
  SegmentationSpec segmentation = SingletonSegments{};
  ReferenceSpec reference = MeanReference{};
  std::vector<MethodEntry> methods;
  std::vector<double> sigmas;
  std::vector<Eigen::Index> sample_sizes;
  std::vector<double> lambdas{1.0};
  LambdaConvention lambda_convention = LambdaConvention::kRaw;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t master_seed = 0;
  // Adds the unit-weight and lambda = 0 variants of every LIME cell.
  bool ablations = false;
  std::optional<int> k;  // default min(20, d)
  bool use_abs = false;
  std::vector<double> epsilons;
  std::vector<BallNorm> norms{BallNorm::kL2};
  Eigen::Index m = 1000;
  std::string output;
  OutputFormat format = OutputFormat::kCsv;
  int jobs = 1;
  // Only used by the `distributions` table.
  int d = 20;
};

// Relative file paths (model, inputs) resolve against base_dir. Throws
// kConfigError on any invariant violation.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::string& path);

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// One explanation per seed and a top-K Jaccard report per grid cell
// (method x sigma x lambda x n).
Table run_stability(const ExperimentConfig& config);

// LIME vs GLIME-Binomial distance per (sigma, lambda, n), on the first input
// and the first seed.
Table run_convergence(const ExperimentConfig& config);

// Local fidelity per (method, sigma, lambda, n, epsilon, norm), mean and std
// over inputs.
Table run_fidelity(const ExperimentConfig& config);

// pmf and kernel weights per (sigma, k) at dimension config.d.
Table run_distributions(const ExperimentConfig& config);

// CSV (RFC 4180, header row) or JSON (array of objects). Doubles are written
// with 17 significant digits.
void emit(const Table& table, OutputFormat format, const std::string& path);
std::string render(const Table& table, OutputFormat format);

std::string format_double(double v);
OutputFormat format_from_name(const std::string& name);

}  // namespace glime
