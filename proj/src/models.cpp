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


#include "glime/models.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <string>
#include <utility>

#include "glime/error.hpp"
#include "httplib.h"
#include "overloaded.hpp"

namespace glime {

namespace {

using internal::Overloaded;

void check_columns(const Matrix& points, Eigen::Index dim) {
  if (points.cols() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "points have " + std::to_string(points.cols()) +
                    " columns, model expects " + std::to_string(dim));
  }
}

double mlp_forward(const MlpModel& mlp, const Vector& x) {
  Vector h = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    h = layer.weights * h + layer.bias;
    if (l + 1 < mlp.layers.size()) h = h.array().tanh().matrix();
  }
  return h(0);
}

Vector evaluate_remote(const RemoteModel& remote, const Matrix& points) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(remote.endpoint, match, kUrl)) {
    throw Error(ErrorCode::kRemoteUnavailable,
                "unsupported endpoint '" + remote.endpoint + "'");
  }
  const std::string host = match[1].str();
  const std::string path = match[2].matched ? match[2].str() : "/";

  httplib::Client client(host);
  const auto timeout = std::chrono::milliseconds(remote.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  Vector values(points.rows());
  const Eigen::Index batch = remote.batch_size;
  for (Eigen::Index start = 0; start < points.rows(); start += batch) {
    const Eigen::Index count = std::min(batch, points.rows() - start);
    nlohmann::json body;
    auto& rows = body["points"] = nlohmann::json::array();
    for (Eigen::Index i = start; i < start + count; ++i) {
      rows.push_back(std::vector<double>(points.row(i).begin(), points.row(i).end()));
    }
    const std::string payload = body.dump();

    httplib::Result result;
    for (int attempt = 0; attempt <= remote.retries; ++attempt) {
      result = client.Post(path, payload, "application/json");
      if (result && result->status < 400) break;
    }
    if (!result) {
      throw Error(ErrorCode::kRemoteUnavailable,
                  remote.endpoint + ": " + httplib::to_string(result.error()));
    }
    if (result->status >= 400) {
      throw Error(ErrorCode::kRemoteUnavailable,
                  remote.endpoint + " returned HTTP " + std::to_string(result->status));
    }

    nlohmann::json reply = nlohmann::json::parse(result->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("values") ||
        !reply["values"].is_array()) {
      throw Error(ErrorCode::kRemoteMalformed, "response lacks a \"values\" array");
    }
    const auto& out = reply["values"];
    if (static_cast<Eigen::Index>(out.size()) != count) {
      throw Error(ErrorCode::kRemoteMalformed,
                  "expected " + std::to_string(count) + " values, got " +
                      std::to_string(out.size()));
    }
    for (Eigen::Index i = 0; i < count; ++i) {
      if (!out[i].is_number()) {
        throw Error(ErrorCode::kRemoteMalformed, "non-numeric value in response");
      }
      values(start + i) = out[i].get<double>();
    }
  }
  return values;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw Error(ErrorCode::kConfigError, "ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json to_json_array(const Vector& v) {
  return std::vector<double>(v.begin(), v.end());
}

nlohmann::json to_json_array(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return out;
}

}  // namespace

QuadraticModel::QuadraticModel(const Matrix& matrix, Vector coefficients, double bias)
    : matrix_(0.5 * (matrix + matrix.transpose())),
      coefficients_(std::move(coefficients)),
      bias_(bias) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != coefficients_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "quadratic matrix must be DxD with D = coefficient length");
  }
}

Eigen::Index input_dim(const ModelSpec& model) {
  return std::visit(
      Overloaded{
          [](const LinearModel& m) { return m.coefficients.size(); },
          [](const QuadraticModel& m) { return m.coefficients().size(); },
          [](const MlpModel& m) {
            return m.layers.empty() ? Eigen::Index{0} : m.layers.front().weights.cols();
          },
          [](const RemoteModel& m) { return m.input_dim; },
      },
      model);
}

Vector evaluate(const ModelSpec& model, const Matrix& points) {
  check_columns(points, input_dim(model));
  return std::visit(
      Overloaded{
          [&](const LinearModel& m) {
            Vector out(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
              out(i) = points.row(i).dot(m.coefficients.transpose()) + m.bias;
            }
            return out;
          },
          [&](const QuadraticModel& m) {
            Vector out(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
              const Vector x = points.row(i).transpose();
              out(i) = x.dot(m.matrix() * x) + m.coefficients().dot(x) + m.bias();
            }
            return out;
          },
          [&](const MlpModel& m) {
            Vector out(points.rows());
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
              out(i) = mlp_forward(m, points.row(i).transpose());
            }
            return out;
          },
          [&](const RemoteModel& m) { return evaluate_remote(m, points); },
      },
      model);
}

Vector gradient(const ModelSpec& model, const Vector& point) {
  if (point.size() != input_dim(model)) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient point has wrong length");
  }
  return std::visit(
      Overloaded{
          [&](const LinearModel& m) -> Vector { return m.coefficients; },
          [&](const QuadraticModel& m) -> Vector {
            return 2.0 * m.matrix() * point + m.coefficients();
          },
          [&](const MlpModel& m) -> Vector {
            constexpr double kStep = 1e-5;
            Vector grad(point.size());
            Vector probe = point;
            for (Eigen::Index i = 0; i < point.size(); ++i) {
              probe(i) = point(i) + kStep;
              const double up = mlp_forward(m, probe);
              probe(i) = point(i) - kStep;
              const double down = mlp_forward(m, probe);
              probe(i) = point(i);
              grad(i) = (up - down) / (2.0 * kStep);
            }
            return grad;
          },
          [&](const RemoteModel&) -> Vector {
            throw Error(ErrorCode::kUnsupportedModel, "remote models have no gradient");
          },
      },
      model);
}

ModelSpec model_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      return LinearModel{vector_from_json(j.at("coefficients")), j.value("bias", 0.0)};
    }
    if (kind == "quadratic") {
      return QuadraticModel(matrix_from_json(j.at("matrix")),
                            vector_from_json(j.at("coefficients")), j.value("bias", 0.0));
    }
    if (kind == "mlp") {
      if (j.value("activation", std::string("tanh")) != "tanh") {
        throw Error(ErrorCode::kConfigError, "only tanh activation is supported");
      }
      MlpModel mlp;
      for (const auto& layer : j.at("layers")) {
        DenseLayer dense{matrix_from_json(layer.at("weights")), vector_from_json(layer.at("bias"))};
        if (dense.bias.size() != dense.weights.rows()) {
          throw Error(ErrorCode::kConfigError, "layer bias length differs from output count");
        }
        if (!mlp.layers.empty() && mlp.layers.back().weights.rows() != dense.weights.cols()) {
          throw Error(ErrorCode::kConfigError, "consecutive layer shapes do not chain");
        }
        mlp.layers.push_back(std::move(dense));
      }
      if (mlp.layers.empty() || mlp.layers.back().weights.rows() != 1) {
        throw Error(ErrorCode::kConfigError, "mlp must end in a single output");
      }
      return mlp;
    }
    if (kind == "remote") {
      RemoteModel remote;
      remote.endpoint = j.at("endpoint").get<std::string>();
      remote.input_dim = j.at("input_dim").get<Eigen::Index>();
      remote.timeout_ms = j.value("timeout_ms", 5000);
      remote.batch_size = j.value("batch_size", 256);
      remote.retries = j.value("retries", 0);
      if (remote.batch_size <= 0 || remote.timeout_ms <= 0 || remote.retries < 0 ||
          remote.input_dim <= 0) {
        throw Error(ErrorCode::kConfigError, "remote model parameters must be positive");
      }
      return remote;
    }
    throw Error(ErrorCode::kConfigError, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed model: ") + e.what());
  }
}

nlohmann::json model_to_json(const ModelSpec& model) {
  return std::visit(
      Overloaded{
          [](const LinearModel& m) {
            return nlohmann::json{{"kind", "linear"},
                                  {"coefficients", to_json_array(m.coefficients)},
                                  {"bias", m.bias}};
          },
          [](const QuadraticModel& m) {
            return nlohmann::json{{"kind", "quadratic"},
                                  {"matrix", to_json_array(m.matrix())},
                                  {"coefficients", to_json_array(m.coefficients())},
                                  {"bias", m.bias()}};
          },
          [](const MlpModel& m) {
            nlohmann::json layers = nlohmann::json::array();
            for (const auto& layer : m.layers) {
              layers.push_back({{"weights", to_json_array(layer.weights)},
                                {"bias", to_json_array(layer.bias)}});
            }
            return nlohmann::json{{"kind", "mlp"}, {"activation", "tanh"}, {"layers", layers}};
          },
          [](const RemoteModel& m) {
            return nlohmann::json{{"kind", "remote"},         {"endpoint", m.endpoint},
                                  {"input_dim", m.input_dim}, {"timeout_ms", m.timeout_ms},
                                  {"batch_size", m.batch_size}, {"retries", m.retries}};
          },
      },
      model);
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open model file " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigError, "model file is not JSON: " + path);
  return model_from_json(j);
}

}  // namespace glime
