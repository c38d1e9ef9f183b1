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


#include "glime/sampling.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "glime/error.hpp"
#include "overloaded.hpp"

namespace glime {

namespace {

using internal::Overloaded;

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive and finite");
  }
}

double uniform01(std::mt19937_64& rng) {
  // 53 random mantissa bits, strictly inside (0, 1).
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

int ones(const Vector& zprime) {
  int k = 0;
  for (Eigen::Index i = 0; i < zprime.size(); ++i) {
    if (zprime(i) == 1.0) {
      ++k;
    } else if (zprime(i) != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "weight kernels expect binary vectors");
    }
  }
  return k;
}

}  // namespace

void validate(const DistributionSpec& dist) {
  std::visit(Overloaded{
                 [](const UniformBinary& u) {
                   if (u.d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
                 },
                 [](const auto& s) {
                   if (s.d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
                   require_sigma(s.sigma);
                 },
             },
             dist);
}

void validate(const WeightSpec& wspec) {
  if (const auto* k = std::get_if<ExpKernel>(&wspec)) require_sigma(k->sigma);
}

int dimension(const DistributionSpec& dist) {
  return std::visit([](const auto& s) { return s.d; }, dist);
}

double binomial_inclusion_probability(double sigma) {
  require_sigma(sigma);
  return 1.0 / (1.0 + std::exp(-1.0 / (sigma * sigma)));
}

Matrix draw(const DistributionSpec& dist, Eigen::Index n, std::uint64_t seed) {
  validate(dist);
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const int d = dimension(dist);
  std::mt19937_64 rng(seed);
  Matrix out(n, d);

  std::visit(
      Overloaded{
          [&](const UniformBinary&) {
            for (Eigen::Index i = 0; i < n; ++i)
              for (int j = 0; j < d; ++j) out(i, j) = (rng() >> 63) ? 1.0 : 0.0;
          },
          [&](const Binomial& b) {
            const double p = binomial_inclusion_probability(b.sigma);
            for (Eigen::Index i = 0; i < n; ++i)
              for (int j = 0; j < d; ++j) out(i, j) = uniform01(rng) < p ? 1.0 : 0.0;
          },
          [&](const Gaussian& g) {
            std::normal_distribution<double> normal(0.0, g.sigma);
            for (Eigen::Index i = 0; i < n; ++i)
              for (int j = 0; j < d; ++j) out(i, j) = normal(rng);
          },
          [&](const Laplace& l) {
            const double scale = l.sigma / std::numbers::sqrt2;
            for (Eigen::Index i = 0; i < n; ++i) {
              for (int j = 0; j < d; ++j) {
                const double u = uniform01(rng) - 0.5;
                out(i, j) = -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
              }
            }
          },
          [&](const UniformBox& box) {
            const double half = std::sqrt(3.0) * box.sigma;
            for (Eigen::Index i = 0; i < n; ++i)
              for (int j = 0; j < d; ++j) out(i, j) = half * (2.0 * uniform01(rng) - 1.0);
          },
      },
      dist);
  return out;
}

double log_weight(const WeightSpec& wspec, const Vector& zprime) {
  validate(wspec);
  const int d = static_cast<int>(zprime.size());
  const int k = ones(zprime);
  return std::visit(
      Overloaded{
          [&](const ExpKernel& e) { return (k - d) / (e.sigma * e.sigma); },
          [&](const ShapKernel&) {
            if (k == 0 || k == d) {
              throw Error(ErrorCode::kShapDegenerate,
                          "Shapley kernel weight is infinite for empty or full coalitions");
            }
            return std::log(static_cast<double>(d - 1)) - log_binomial_coefficient(d, k) -
                   std::log(static_cast<double>(k)) - std::log(static_cast<double>(d - k));
          },
          [&](const UnitWeight&) { return 0.0; },
      },
      wspec);
}

double weight(const WeightSpec& wspec, const Vector& zprime) {
  return std::max(std::exp(log_weight(wspec, zprime)), std::numeric_limits<double>::min());
}

double log_binomial_coefficient(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_log_pmf(int d, double sigma, int k) {
  require_sigma(sigma);
  if (d < 1 || k < 0 || k > d) {
    throw Error(ErrorCode::kInvalidArgument, "binomial_pmf needs 0 <= k <= d, d >= 1");
  }
  const double inv = 1.0 / (sigma * sigma);
  return log_binomial_coefficient(d, k) + k * inv - d * softplus(inv);
}

double binomial_pmf(int d, double sigma, int k) { return std::exp(binomial_log_pmf(d, sigma, k)); }

double expected_weight_uniform(int d, double sigma) {
  require_sigma(sigma);
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  const double inv = 1.0 / (sigma * sigma);
  return std::exp(d * (softplus(-inv) - std::numbers::ln2));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t replicate) {
  return splitmix64(master ^ replicate);
}

nlohmann::json distribution_to_json(const DistributionSpec& dist) {
  return std::visit(
      Overloaded{
          [](const UniformBinary& u) { return nlohmann::json{{"kind", "uniform_binary"}, {"d", u.d}}; },
          [](const Binomial& s) {
            return nlohmann::json{{"kind", "binomial"}, {"d", s.d}, {"sigma", s.sigma}};
          },
          [](const Gaussian& s) {
            return nlohmann::json{{"kind", "gaussian"}, {"d", s.d}, {"sigma", s.sigma}};
          },
          [](const Laplace& s) {
            return nlohmann::json{{"kind", "laplace"}, {"d", s.d}, {"sigma", s.sigma}};
          },
          [](const UniformBox& s) {
            return nlohmann::json{{"kind", "uniform_box"}, {"d", s.d}, {"sigma", s.sigma}};
          },
      },
      dist);
}

DistributionSpec distribution_from_json(const nlohmann::json& j) {
  DistributionSpec dist;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int d = j.at("d").get<int>();
    if (kind == "uniform_binary") {
      dist = UniformBinary{d};
    } else if (kind == "binomial") {
      dist = Binomial{d, j.at("sigma").get<double>()};
    } else if (kind == "gaussian") {
      dist = Gaussian{d, j.at("sigma").get<double>()};
    } else if (kind == "laplace") {
      dist = Laplace{d, j.at("sigma").get<double>()};
    } else if (kind == "uniform_box") {
      dist = UniformBox{d, j.at("sigma").get<double>()};
    } else {
      throw Error(ErrorCode::kConfigError, "unknown distribution kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed distribution: ") + e.what());
  }
  validate(dist);
  return dist;
}

nlohmann::json weight_to_json(const WeightSpec& wspec) {
  return std::visit(Overloaded{
                        [](const ExpKernel& e) {
                          return nlohmann::json{{"kind", "exp_kernel"}, {"sigma", e.sigma}};
                        },
                        [](const ShapKernel&) { return nlohmann::json{{"kind", "shap_kernel"}}; },
                        [](const UnitWeight&) { return nlohmann::json{{"kind", "unit"}}; },
                    },
                    wspec);
}

WeightSpec weight_from_json(const nlohmann::json& j) {
  WeightSpec wspec;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exp_kernel") {
      wspec = ExpKernel{j.at("sigma").get<double>()};
    } else if (kind == "shap_kernel") {
      wspec = ShapKernel{};
    } else if (kind == "unit") {
      wspec = UnitWeight{};
    } else {
      throw Error(ErrorCode::kConfigError, "unknown weight kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed weight: ") + e.what());
  }
  validate(wspec);
  return wspec;
}

}  // namespace glime
