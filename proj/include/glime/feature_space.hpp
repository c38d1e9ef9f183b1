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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glime/types.hpp"
#include "json.hpp"

namespace glime {

// Raw image inputs are flattened in height-width-channel order.
struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

// Partition of D raw coordinates into d non-empty interpretable features.
class Segmentation {
 public:
  Segmentation(std::vector<int> assignment, int num_features,
               std::optional<ImageShape> shape = std::nullopt);

  // d = D, feature i owns raw coordinate i.
  static Segmentation singleton(Eigen::Index raw_dim);

  int num_features() const { return num_features_; }
  Eigen::Index raw_dim() const { return static_cast<Eigen::Index>(assignment_.size()); }
  int feature_of(Eigen::Index raw_index) const { return assignment_[raw_index]; }
  const std::vector<int>& assignment() const { return assignment_; }
  const std::vector<Eigen::Index>& members(int feature) const { return members_[feature]; }
  const std::optional<ImageShape>& shape() const { return shape_; }

 private:
  std::vector<int> assignment_;
  int num_features_;
  std::optional<ImageShape> shape_;
  std::vector<std::vector<Eigen::Index>> members_;
};

// Replacement values used for absent features in binary perturbations.
struct Reference {
  Vector values;
};

// rows x cols rectangular cells; the last cell on each axis absorbs the
// remainder pixels and all channels of a pixel share its cell.
Segmentation grid_segment(int height, int width, int channels, int rows, int cols);

// Each raw coordinate is replaced by the mean of its whole segment
// (channels pooled together).
Reference mean_reference(const Vector& x, const Segmentation& seg);

// z_i = x_i where zprime[seg(i)] = 1, else r_i.
Vector reconstruct_binary(const Vector& x, const Reference& ref, const Segmentation& seg,
                          const Vector& zprime);

// z_i = x_i + zprime[seg(i)].
Vector reconstruct_continuous(const Vector& x, const Segmentation& seg, const Vector& zprime);

// Row-wise batch forms of the two reconstructions: n x d samples in, n x D out.
Matrix reconstruct_binary_rows(const Vector& x, const Reference& ref, const Segmentation& seg,
                               const Matrix& zprime);
Matrix reconstruct_continuous_rows(const Vector& x, const Segmentation& seg,
                                   const Matrix& zprime);

// Per-feature mean of a raw-space offset; left inverse of the continuous lift.
Vector feature_offsets(const Segmentation& seg, const Vector& raw_offset);

nlohmann::json segmentation_to_json(const Segmentation& seg);
Segmentation segmentation_from_json(const nlohmann::json& j);

// Flat numeric input with optional image shape: {"values": [...], "shape": [h, w, c]}.
struct InputArray {
  Vector values;
  std::optional<ImageShape> shape;
};

InputArray input_from_json(const nlohmann::json& j);
InputArray load_input(const std::string& path);

}  // namespace glime
