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


#include "glime/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "glime/error.hpp"

namespace glime {

namespace {

double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Average ranks (1-based) with ties sharing the mean of their positions.
Vector average_ranks(const Vector& v) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  Vector ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v(order[j + 1]) == v(order[i])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks(order[t]) = rank;
    i = j + 1;
  }
  return ranks;
}

// Pearson correlation, or nullopt-like NaN when either side is constant.
double pearson(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return std::nan("");
  return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

}  // namespace

std::vector<int> top_k_indices(const Vector& w, int k, bool use_abs) {
  if (k < 1 || k > w.size()) {
    throw Error(ErrorCode::kInvalidArgument, "top-k needs 1 <= k <= d");
  }
  std::vector<int> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) { return use_abs ? std::abs(w(i)) : w(i); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) > key(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

double jaccard_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> sa(a), sb(b), common, all;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(all));
  if (all.empty()) return 1.0;
  return static_cast<double>(common.size()) / static_cast<double>(all.size());
}

StabilityReport top_k_jaccard(std::span<const Vector> attributions, int k, bool use_abs) {
  if (attributions.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "stability needs at least two explanations");
  }
  const Eigen::Index d = attributions.front().size();
  std::vector<std::vector<int>> tops;
  for (const Vector& w : attributions) {
    if (w.size() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "explanations have different dimensions");
    }
    tops.push_back(top_k_indices(w, k, use_abs));
  }
  StabilityReport report;
  report.k = k;
  report.n_seeds = static_cast<int>(attributions.size());
  for (std::size_t i = 0; i < tops.size(); ++i) {
    for (std::size_t j = i + 1; j < tops.size(); ++j) {
      report.pair_values.push_back(jaccard_index(tops[i], tops[j]));
    }
  }
  report.mean_jaccard =
      std::accumulate(report.pair_values.begin(), report.pair_values.end(), 0.0) /
      static_cast<double>(report.pair_values.size());
  return report;
}

StabilityReport top_k_jaccard(std::span<const Explanation> explanations, int k, bool use_abs) {
  std::vector<Vector> ws;
  ws.reserve(explanations.size());
  for (const auto& e : explanations) ws.push_back(e.w);
  return top_k_jaccard(std::span<const Vector>(ws), k, use_abs);
}

std::string norm_name(BallNorm norm) {
  switch (norm) {
    case BallNorm::kL1: return "l1";
    case BallNorm::kL2: return "l2";
    case BallNorm::kLinf: return "linf";
  }
  return "l2";
}

BallNorm norm_from_name(const std::string& name) {
  if (name == "l1") return BallNorm::kL1;
  if (name == "l2") return BallNorm::kL2;
  if (name == "linf") return BallNorm::kLinf;
  throw Error(ErrorCode::kConfigError, "unknown norm '" + name + "'");
}

double ball_norm(const Vector& v, BallNorm norm) {
  switch (norm) {
    case BallNorm::kL1: return v.lpNorm<1>();
    case BallNorm::kL2: return v.norm();
    case BallNorm::kLinf: return v.lpNorm<Eigen::Infinity>();
  }
  return v.norm();
}

Matrix sample_ball(const Vector& x, double epsilon, BallNorm norm, Eigen::Index m,
                   std::uint64_t seed) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be finite and >= 0");
  }
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const Eigen::Index dim = x.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(m, dim);
  Vector u(dim);
  for (Eigen::Index s = 0; s < m; ++s) {
    switch (norm) {
      case BallNorm::kLinf:
        for (Eigen::Index i = 0; i < dim; ++i) u(i) = 2.0 * uniform01(rng) - 1.0;
        break;
      case BallNorm::kL2: {
        for (Eigen::Index i = 0; i < dim; ++i) u(i) = normal(rng);
        const double radius = std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
        u *= radius / u.norm();
        break;
      }
      case BallNorm::kL1: {
        // D+1 unit exponentials normalized by their sum give a uniform point
        // of the open simplex; random signs spread it over the cross-polytope.
        double total = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
          u(i) = -std::log(uniform01(rng));
          total += u(i);
        }
        total += -std::log(uniform01(rng));
        for (Eigen::Index i = 0; i < dim; ++i) {
          u(i) = (rng() >> 63 ? -u(i) : u(i)) / total;
        }
        break;
      }
    }
    out.row(s) = (x + epsilon * u).transpose();
  }
  return out;
}

FidelityReport local_fidelity(const ModelSpec& model, const Vector& x,
                              const Explanation& explanation, const Segmentation& seg,
                              double epsilon, BallNorm norm, Eigen::Index m, std::uint64_t seed) {
  if (explanation.w.size() != seg.num_features()) {
    throw Error(ErrorCode::kDimensionMismatch, "explanation dimension differs from segmentation");
  }
  if (x.size() != seg.raw_dim()) {
    throw Error(ErrorCode::kLengthMismatch, "input length differs from segmentation size");
  }
  const Matrix points = sample_ball(x, epsilon, norm, m, seed);
  const Vector values = evaluate(model, points);
  double sum = 0.0;
  for (Eigen::Index s = 0; s < m; ++s) {
    const Vector offset = feature_offsets(seg, points.row(s).transpose() - x);
    const double residual = values(s) - explanation.intercept - explanation.w.dot(offset);
    sum += residual * residual;
  }
  FidelityReport report;
  report.epsilon = epsilon;
  report.norm = norm;
  report.mse = sum / static_cast<double>(m);
  report.fidelity = 1.0 / (1.0 + report.mse);
  report.m = m;
  return report;
}

DistanceReport explanation_distance(const Vector& w1, const Vector& w2) {
  if (w1.size() != w2.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "explanations have different dimensions");
  }
  if (w1.size() < 2) throw Error(ErrorCode::kInvalidArgument, "distance needs d >= 2");
  const Vector diff = w1 - w2;
  DistanceReport report;
  report.mse = diff.squaredNorm() / static_cast<double>(diff.size());
  report.mae = diff.cwiseAbs().sum() / static_cast<double>(diff.size());
  const double p = pearson(w1, w2);
  if (std::isnan(p)) {
    report.degenerate_variance = true;
    return report;
  }
  report.pearson = p;
  report.spearman = pearson(average_ranks(w1), average_ranks(w2));
  return report;
}

DistanceReport explanation_distance(const Explanation& e1, const Explanation& e2) {
  return explanation_distance(e1.w, e2.w);
}

}  // namespace glime
