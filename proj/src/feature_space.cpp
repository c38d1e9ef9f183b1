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


#include "glime/feature_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>

#include "glime/error.hpp"

namespace glime {

namespace {

void check_length(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kLengthMismatch, std::string(what) + " has length " +
                                                std::to_string(got) + ", expected " +
                                                std::to_string(want));
  }
}

}  // namespace

Segmentation::Segmentation(std::vector<int> assignment, int num_features,
                           std::optional<ImageShape> shape)
    : assignment_(std::move(assignment)), num_features_(num_features), shape_(shape) {
  if (num_features_ <= 0 || assignment_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "segmentation needs at least one feature");
  }
  if (shape_ && static_cast<std::size_t>(shape_->height) * shape_->width * shape_->channels !=
                    assignment_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "image shape does not match assignment length");
  }
  members_.resize(num_features_);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    const int id = assignment_[i];
    if (id < 0 || id >= num_features_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment id " + std::to_string(id) + " out of range");
    }
    members_[id].push_back(static_cast<Eigen::Index>(i));
  }
  for (int f = 0; f < num_features_; ++f) {
    if (members_[f].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "segment " + std::to_string(f) + " is empty");
    }
  }
}

Segmentation Segmentation::singleton(Eigen::Index raw_dim) {
  std::vector<int> assignment(static_cast<std::size_t>(raw_dim));
  for (std::size_t i = 0; i < assignment.size(); ++i) assignment[i] = static_cast<int>(i);
  return Segmentation(std::move(assignment), static_cast<int>(raw_dim));
}

Segmentation grid_segment(int height, int width, int channels, int rows, int cols) {
  if (height <= 0 || width <= 0 || channels <= 0 || rows <= 0 || cols <= 0 || rows > height ||
      cols > width) {
    throw Error(ErrorCode::kInvalidGrid, "grid " + std::to_string(rows) + "x" +
                                             std::to_string(cols) + " does not fit image " +
                                             std::to_string(height) + "x" +
                                             std::to_string(width));
  }
  const int cell_h = height / rows;
  const int cell_w = width / cols;
  std::vector<int> assignment(static_cast<std::size_t>(height) * width * channels);
  std::size_t idx = 0;
  for (int y = 0; y < height; ++y) {
    const int gr = std::min(y / cell_h, rows - 1);
    for (int x = 0; x < width; ++x) {
      const int gc = std::min(x / cell_w, cols - 1);
      for (int c = 0; c < channels; ++c) assignment[idx++] = gr * cols + gc;
    }
  }
  return Segmentation(std::move(assignment), rows * cols, ImageShape{height, width, channels});
}

Reference mean_reference(const Vector& x, const Segmentation& seg) {
  check_length(x.size(), seg.raw_dim(), "input");
  Vector r(x.size());
  for (int f = 0; f < seg.num_features(); ++f) {
    double sum = 0.0;
    for (Eigen::Index i : seg.members(f)) sum += x(i);
    const double mean = sum / static_cast<double>(seg.members(f).size());
    for (Eigen::Index i : seg.members(f)) r(i) = mean;
  }
  return Reference{std::move(r)};
}

Vector reconstruct_binary(const Vector& x, const Reference& ref, const Segmentation& seg,
                          const Vector& zprime) {
  check_length(zprime.size(), seg.num_features(), "mask");
  Matrix row = zprime.transpose();
  return reconstruct_binary_rows(x, ref, seg, row).row(0).transpose();
}

Vector reconstruct_continuous(const Vector& x, const Segmentation& seg, const Vector& zprime) {
  check_length(zprime.size(), seg.num_features(), "offset");
  Matrix row = zprime.transpose();
  return reconstruct_continuous_rows(x, seg, row).row(0).transpose();
}

Matrix reconstruct_binary_rows(const Vector& x, const Reference& ref, const Segmentation& seg,
                               const Matrix& zprime) {
  check_length(x.size(), seg.raw_dim(), "input");
  check_length(ref.values.size(), seg.raw_dim(), "reference");
  check_length(zprime.cols(), seg.num_features(), "mask");
  Matrix out(zprime.rows(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const int f = seg.feature_of(i);
    for (Eigen::Index s = 0; s < zprime.rows(); ++s) {
      const double z = zprime(s, f);
      if (z != 0.0 && z != 1.0) {
        throw Error(ErrorCode::kInvalidArgument, "binary mask entries must be 0 or 1");
      }
      out(s, i) = z == 1.0 ? x(i) : ref.values(i);
    }
  }
  return out;
}

Matrix reconstruct_continuous_rows(const Vector& x, const Segmentation& seg,
                                   const Matrix& zprime) {
  check_length(x.size(), seg.raw_dim(), "input");
  check_length(zprime.cols(), seg.num_features(), "offset");
  Matrix out(zprime.rows(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out.col(i) = zprime.col(seg.feature_of(i)).array() + x(i);
  }
  return out;
}

Vector feature_offsets(const Segmentation& seg, const Vector& raw_offset) {
  check_length(raw_offset.size(), seg.raw_dim(), "offset");
  Vector out(seg.num_features());
  for (int f = 0; f < seg.num_features(); ++f) {
    double sum = 0.0;
    for (Eigen::Index i : seg.members(f)) sum += raw_offset(i);
    out(f) = sum / static_cast<double>(seg.members(f).size());
  }
  return out;
}

nlohmann::json segmentation_to_json(const Segmentation& seg) {
  nlohmann::json j{{"num_features", seg.num_features()}, {"assignment", seg.assignment()}};
  if (seg.shape()) {
    j["shape"] = {seg.shape()->height, seg.shape()->width, seg.shape()->channels};
  }
  return j;
}

namespace {

std::optional<ImageShape> shape_from_json(const nlohmann::json& j) {
  if (!j.contains("shape") || j["shape"].is_null()) return std::nullopt;
  const auto dims = j["shape"].get<std::vector<int>>();
  if (dims.size() != 3 || dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw Error(ErrorCode::kConfigError, "shape must be [height, width, channels]");
  }
  return ImageShape{dims[0], dims[1], dims[2]};
}

}  // namespace

Segmentation segmentation_from_json(const nlohmann::json& j) {
  try {
    return Segmentation(j.at("assignment").get<std::vector<int>>(),
                        j.at("num_features").get<int>(), shape_from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed segmentation: ") + e.what());
  }
}

InputArray input_from_json(const nlohmann::json& j) {
  try {
    const auto values = j.at("values").get<std::vector<double>>();
    InputArray input{Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())),
                     shape_from_json(j)};
    if (input.values.size() == 0 || !input.values.allFinite()) {
      throw Error(ErrorCode::kConfigError, "input values must be non-empty and finite");
    }
    if (input.shape && static_cast<Eigen::Index>(input.shape->height) * input.shape->width *
                               input.shape->channels != input.values.size()) {
      throw Error(ErrorCode::kConfigError, "input shape does not match value count");
    }
    return input;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed input: ") + e.what());
  }
}

InputArray load_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open input file " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigError, "input file is not JSON: " + path);
  return input_from_json(j);
}

}  // namespace glime
