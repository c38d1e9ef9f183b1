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


#include "glime/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "glime/error.hpp"
#include "glime/sampling.hpp"
#include "glime/solver.hpp"
#include "overloaded.hpp"

namespace glime {

namespace {

using internal::Overloaded;

constexpr Eigen::Index kEvalChunk = 4096;
constexpr int kMaxExactShapDim = 20;

void check_request(const ExplainRequest& req) {
  if (req.n < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  if (req.x.size() != req.segmentation.raw_dim()) {
    throw Error(ErrorCode::kLengthMismatch, "input length differs from segmentation size");
  }
  if (req.x.size() != input_dim(req.model)) {
    throw Error(ErrorCode::kDimensionMismatch, "input length differs from model dimension");
  }
  if (auto sigma = method_sigma(req.method); sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
    throw Error(ErrorCode::kInvalidArgument, "method sigma must be positive");
  }
  if (is_binary_method(req.method)) {
    if (!req.reference) {
      throw Error(ErrorCode::kInvalidArgument,
                  method_name(req.method) + " requires a reference");
    }
    if (req.reference->values.size() != req.x.size() || !req.reference->values.allFinite()) {
      throw Error(ErrorCode::kLengthMismatch, "reference must be finite with input length");
    }
  }
}

// Lifts feature-space samples to raw inputs chunk by chunk and evaluates f.
Vector evaluate_lifted(const ModelSpec& model, const Matrix& zprime,
                       const std::function<Matrix(const Matrix&)>& lift) {
  Vector values(zprime.rows());
  for (Eigen::Index start = 0; start < zprime.rows(); start += kEvalChunk) {
    const Eigen::Index count = std::min(kEvalChunk, zprime.rows() - start);
    values.segment(start, count) = evaluate(model, lift(zprime.middleRows(start, count)));
  }
  return values;
}

Explanation make_explanation(const ExplainRequest& req, const RidgeSolution& sol,
                             double lambda) {
  Explanation e;
  e.w = sol.w;
  e.intercept = sol.intercept;
  e.r2 = sol.r2;
  e.method = req.method;
  e.n = req.n;
  e.seed = req.seed;
  e.lambda = lambda;
  e.d = req.segmentation.num_features();
  return e;
}

Explanation solve_binary(const ExplainRequest& req, Matrix masks, const WeightSpec& wspec,
                         double lambda) {
  const Vector& x = req.x;
  const Reference& ref = *req.reference;
  const Segmentation& seg = req.segmentation;

  RidgeProblem problem;
  problem.responses = evaluate_lifted(req.model, masks, [&](const Matrix& chunk) {
    return reconstruct_binary_rows(x, ref, seg, chunk);
  });
  problem.sample_weights.resize(masks.rows());
  for (Eigen::Index i = 0; i < masks.rows(); ++i) {
    problem.sample_weights(i) = weight(wspec, masks.row(i).transpose());
  }
  problem.design = std::move(masks);
  problem.lambda = lambda;
  problem.fit_intercept = true;
  return make_explanation(req, solve_weighted_ridge(problem), lambda);
}

}  // namespace

std::string method_name(const MethodSpec& method) {
  return std::visit(Overloaded{
                        [](const Lime& m) -> std::string {
                          return m.weighted ? "lime" : "lime_unit_weight";
                        },
                        [](const GlimeBinomial&) -> std::string { return "glime_binomial"; },
                        [](const GlimeGauss&) -> std::string { return "glime_gauss"; },
                        [](const GlimeLaplace&) -> std::string { return "glime_laplace"; },
                        [](const GlimeUniform&) -> std::string { return "glime_uniform"; },
                        [](const KernelShap& m) -> std::string {
                          return m.exact ? "kernelshap" : "kernelshap_sampled";
                        },
                        [](const SmoothGrad&) -> std::string { return "smoothgrad"; },
                    },
                    method);
}

std::optional<double> method_sigma(const MethodSpec& method) {
  return std::visit(Overloaded{
                        [](const KernelShap&) -> std::optional<double> { return std::nullopt; },
                        [](const auto& m) -> std::optional<double> { return m.sigma; },
                    },
                    method);
}

bool is_binary_method(const MethodSpec& method) {
  return std::holds_alternative<Lime>(method) || std::holds_alternative<GlimeBinomial>(method) ||
         std::holds_alternative<KernelShap>(method);
}

nlohmann::json method_to_json(const MethodSpec& method) {
  nlohmann::json j{{"kind", method_name(method)}};
  if (auto sigma = method_sigma(method)) j["sigma"] = *sigma;
  return j;
}

MethodSpec method_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    auto sigma = [&] {
      const double s = j.at("sigma").get<double>();
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw Error(ErrorCode::kConfigError, "method sigma must be positive");
      }
      return s;
    };
    if (kind == "lime") return Lime{sigma(), j.value("weighted", true)};
    if (kind == "lime_unit_weight") return Lime{sigma(), false};
    if (kind == "glime_binomial") return GlimeBinomial{sigma()};
    if (kind == "glime_gauss") return GlimeGauss{sigma()};
    if (kind == "glime_laplace") return GlimeLaplace{sigma()};
    if (kind == "glime_uniform") return GlimeUniform{sigma()};
    if (kind == "kernelshap") return KernelShap{j.value("exact", true)};
    if (kind == "kernelshap_sampled") return KernelShap{false};
    if (kind == "smoothgrad") return SmoothGrad{sigma()};
    throw Error(ErrorCode::kConfigError, "unknown method '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed method: ") + e.what());
  }
}

Explanation explain(const ExplainRequest& request) {
  return std::visit(Overloaded{
                        [&](const Lime&) { return explain_lime(request); },
                        [&](const KernelShap&) { return explain_kernelshap(request); },
                        [&](const SmoothGrad& m) {
                          check_request(request);
                          if (request.segmentation.num_features() != request.x.size()) {
                            throw Error(ErrorCode::kInvalidArgument,
                                        "smoothgrad is defined on raw features only");
                          }
                          Explanation e;
                          e.w = smoothgrad_estimate(request.model, request.x, m.sigma,
                                                    request.n, request.seed);
                          e.intercept = evaluate(request.model, request.x.transpose())(0);
                          e.method = request.method;
                          e.n = request.n;
                          e.seed = request.seed;
                          e.lambda = 0.0;
                          e.d = static_cast<int>(e.w.size());
                          return e;
                        },
                        [&](const auto&) { return explain_glime(request); },
                    },
                    request.method);
}

Explanation explain_lime(const ExplainRequest& req) {
  const auto* lime = std::get_if<Lime>(&req.method);
  if (lime == nullptr) throw Error(ErrorCode::kInvalidArgument, "explain_lime needs a Lime method");
  check_request(req);
  const int d = req.segmentation.num_features();
  const WeightSpec wspec = lime->weighted ? WeightSpec{ExpKernel{lime->sigma}} : WeightSpec{UnitWeight{}};
  return solve_binary(req, draw(UniformBinary{d}, req.n, req.seed), wspec, req.lambda);
}

Explanation explain_glime(const ExplainRequest& req) {
  check_request(req);
  const int d = req.segmentation.num_features();
  if (const auto* m = std::get_if<GlimeBinomial>(&req.method)) {
    return solve_binary(req, draw(Binomial{d, m->sigma}, req.n, req.seed), UnitWeight{},
                        req.lambda);
  }

  DistributionSpec dist = std::visit(
      Overloaded{
          [&](const GlimeGauss& m) -> DistributionSpec { return Gaussian{d, m.sigma}; },
          [&](const GlimeLaplace& m) -> DistributionSpec { return Laplace{d, m.sigma}; },
          [&](const GlimeUniform& m) -> DistributionSpec { return UniformBox{d, m.sigma}; },
          [&](const auto&) -> DistributionSpec {
            throw Error(ErrorCode::kInvalidArgument,
                        "explain_glime does not handle " + method_name(req.method));
          },
      },
      req.method);

  RidgeProblem problem;
  problem.design = draw(dist, req.n, req.seed);
  problem.responses = evaluate_lifted(req.model, problem.design, [&](const Matrix& chunk) {
    return reconstruct_continuous_rows(req.x, req.segmentation, chunk);
  });
  problem.sample_weights = Vector::Ones(req.n);
  problem.lambda = req.lambda;
  problem.fit_intercept = true;
  return make_explanation(req, solve_weighted_ridge(problem), req.lambda);
}

Explanation explain_kernelshap(const ExplainRequest& req) {
  const auto* shap = std::get_if<KernelShap>(&req.method);
  if (shap == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "explain_kernelshap needs a KernelShap method");
  }
  check_request(req);
  const int d = req.segmentation.num_features();
  if (d < 2) {
    throw Error(ErrorCode::kShapDegenerate, "KernelSHAP needs d >= 2: no proper coalition exists");
  }

  Matrix masks;
  if (shap->exact) {
    if (d > kMaxExactShapDim) {
      throw Error(ErrorCode::kDimensionTooLarge,
                  "exact KernelSHAP enumerates 2^d coalitions; d = " + std::to_string(d) +
                      " exceeds " + std::to_string(kMaxExactShapDim));
    }
    const std::uint64_t full = (std::uint64_t{1} << d) - 1;
    masks.resize(static_cast<Eigen::Index>(full - 1), d);
    Eigen::Index row = 0;
    for (std::uint64_t bits = 1; bits < full; ++bits, ++row) {
      for (int j = 0; j < d; ++j) masks(row, j) = static_cast<double>((bits >> j) & 1U);
    }
  } else {
    masks.resize(req.n, d);
    Eigen::Index kept = 0;
    for (std::uint64_t round = 0; kept < req.n; ++round) {
      const Matrix batch = draw(UniformBinary{d}, req.n, substream_seed(req.seed, round));
      for (Eigen::Index i = 0; i < batch.rows() && kept < req.n; ++i) {
        const double k = batch.row(i).sum();
        if (k == 0.0 || k == d) continue;
        masks.row(kept++) = batch.row(i);
      }
    }
  }
  Explanation e = solve_binary(req, std::move(masks), ShapKernel{}, 0.0);
  if (shap->exact) e.n = static_cast<Eigen::Index>((std::uint64_t{1} << d) - 2);
  return e;
}

Vector smoothgrad_estimate(const ModelSpec& model, const Vector& x, double sigma, Eigen::Index n,
                           std::uint64_t seed) {
  if (x.size() != input_dim(model)) {
    throw Error(ErrorCode::kDimensionMismatch, "input length differs from model dimension");
  }
  const Eigen::Index dim = x.size();
  const Matrix offsets = draw(Gaussian{static_cast<int>(dim), sigma}, n, seed);
  const Vector values = evaluate_lifted(model, offsets, [&](const Matrix& chunk) {
    return Matrix(chunk.rowwise() + x.transpose());
  });
  return (offsets.transpose() * values) / (static_cast<double>(n) * sigma * sigma);
}

LinearLimit infinite_limit_linear_binomial(const Vector& coefficients, double bias,
                                           const Vector& x, const Reference& reference,
                                           const Segmentation& seg, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  if (coefficients.size() != seg.raw_dim() || x.size() != seg.raw_dim() ||
      reference.values.size() != seg.raw_dim()) {
    throw Error(ErrorCode::kLengthMismatch, "coefficients, input and reference must have length D");
  }
  LinearLimit limit{Vector::Zero(seg.num_features()), bias + coefficients.dot(reference.values)};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    limit.w(seg.feature_of(i)) += coefficients(i) * (x(i) - reference.values(i));
  }
  return limit;
}

LinearLimit infinite_limit_linear_gauss(const Vector& coefficients, double bias, const Vector& x,
                                        const Segmentation& seg) {
  if (coefficients.size() != seg.raw_dim() || x.size() != seg.raw_dim()) {
    throw Error(ErrorCode::kLengthMismatch, "coefficients and input must have length D");
  }
  LinearLimit limit{Vector::Zero(seg.num_features()), bias + coefficients.dot(x)};
  for (Eigen::Index i = 0; i < x.size(); ++i) limit.w(seg.feature_of(i)) += coefficients(i);
  return limit;
}

nlohmann::json explanation_to_json(const Explanation& e) {
  nlohmann::json j;
  j["method"] = method_name(e.method);
  if (auto sigma = method_sigma(e.method)) {
    j["sigma"] = *sigma;
  } else {
    j["sigma"] = nullptr;
  }
  j["lambda"] = e.lambda;
  j["n"] = e.n;
  j["seed"] = e.seed;
  j["d"] = e.d;
  j["w"] = std::vector<double>(e.w.begin(), e.w.end());
  j["intercept"] = e.intercept;
  j["r2"] = e.r2;
  return j;
}

Explanation explanation_from_json(const nlohmann::json& j) {
  try {
    nlohmann::json method{{"kind", j.at("method")}};
    if (!j.at("sigma").is_null()) method["sigma"] = j["sigma"];
    Explanation e;
    e.method = method_from_json(method);
    e.lambda = j.at("lambda").get<double>();
    e.n = j.at("n").get<Eigen::Index>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.d = j.at("d").get<int>();
    const auto w = j.at("w").get<std::vector<double>>();
    e.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    e.intercept = j.at("intercept").get<double>();
    e.r2 = j.at("r2").get<double>();
    if (e.w.size() != e.d) throw Error(ErrorCode::kConfigError, "explanation w length != d");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kConfigError, std::string("malformed explanation: ") + ex.what());
  }
}

}  // namespace glime
