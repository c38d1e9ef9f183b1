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


#include "glime/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "glime/error.hpp"
#include "glime/sampling.hpp"
#include "overloaded.hpp"

namespace glime {

namespace {

using internal::Overloaded;
using Row = std::vector<Cell>;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfigError, message);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) config_error(path.string() + " is not valid JSON");
  return j;
}

// Either an inline object or a path to a JSON file holding one.
nlohmann::json inline_or_file(const nlohmann::json& j, const std::filesystem::path& base) {
  return j.is_string() ? read_json_file(resolve(base, j.get<std::string>())) : j;
}

bool method_takes_sigma(const std::string& kind) {
  return kind != "kernelshap" && kind != "kernelshap_sampled";
}

template <class T>
std::vector<T> non_empty_list(const nlohmann::json& j, const char* key) {
  auto values = j.at(key).get<std::vector<T>>();
  if (values.empty()) config_error(std::string("'") + key + "' must be a non-empty list");
  return values;
}

struct PreparedInput {
  Vector x;
  Segmentation seg;
  Reference reference;
};

PreparedInput prepare(const ExperimentConfig& config, const InputArray& input) {
  Segmentation seg = std::visit(
      Overloaded{
          [&](const SingletonSegments&) { return Segmentation::singleton(input.values.size()); },
          [&](const GridSegments& g) {
            if (!input.shape) config_error("grid segmentation needs an input with a shape");
            return grid_segment(input.shape->height, input.shape->width, input.shape->channels,
                                g.rows, g.cols);
          },
      },
      config.segmentation);
  Reference ref = std::visit(
      Overloaded{
          [&](const MeanReference&) { return mean_reference(input.values, seg); },
          [&](const ConstantReference& c) {
            return Reference{Vector::Constant(input.values.size(), c.value)};
          },
          [&](const ExplicitReference& e) {
            if (e.values.size() != input.values.size()) {
              config_error("reference length differs from input length");
            }
            return Reference{e.values};
          },
      },
      config.reference);
  return PreparedInput{input.values, std::move(seg), std::move(ref)};
}

std::vector<PreparedInput> prepare_all(const ExperimentConfig& config) {
  if (config.inputs.empty()) config_error("config has no inputs");
  std::vector<PreparedInput> out;
  for (const auto& input : config.inputs) {
    out.push_back(prepare(config, input));
    if (out.back().x.size() != input_dim(config.model)) {
      config_error("input length differs from the model's input dimension");
    }
  }
  return out;
}

std::vector<MethodSpec> expand_methods(const ExperimentConfig& config) {
  std::vector<MethodSpec> out;
  for (const auto& entry : config.methods) {
    if (!method_takes_sigma(entry.kind)) {
      out.push_back(method_from_json({{"kind", entry.kind}}));
    } else if (entry.sigma) {
      out.push_back(method_from_json({{"kind", entry.kind}, {"sigma", *entry.sigma}}));
    } else {
      if (config.sigmas.empty()) config_error("method '" + entry.kind + "' needs a sigma grid");
      for (double s : config.sigmas) {
        out.push_back(method_from_json({{"kind", entry.kind}, {"sigma", s}}));
      }
    }
  }
  return out;
}

double effective_lambda(const ExperimentConfig& config, double lambda, Eigen::Index n) {
  return config.lambda_convention == LambdaConvention::kPerSample
             ? lambda * static_cast<double>(n)
             : lambda;
}

std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t replicate) {
  return substream_seed(config.master_seed, config.seeds.at(replicate));
}

ExplainRequest make_request(const ExperimentConfig& config, const PreparedInput& input,
                            const MethodSpec& method, Eigen::Index n, double lambda,
                            std::uint64_t seed) {
  return ExplainRequest{config.model, input.x,  input.seg, input.reference,
                        method,       n,        effective_lambda(config, lambda, n), seed};
}

Cell sigma_cell(const MethodSpec& method) {
  if (auto s = method_sigma(method)) return *s;
  return std::monostate{};
}

// Runs `count` independent cells on up to `jobs` threads; the result keeps
// cell order. A cell that throws yields `on_error(message)`.
std::vector<Row> run_cells(int jobs, std::size_t count, const std::function<Row(std::size_t)>& cell,
                           const std::function<Row(std::size_t, const std::string&)>& on_error) {
  std::vector<Row> rows(count);
  auto run_one = [&](std::size_t i) {
    try {
      rows[i] = cell(i);
    } catch (const std::exception& e) {
      rows[i] = on_error(i, e.what());
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) run_one(i);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_cell(const Cell& cell) {
  return std::visit(Overloaded{
                        [](std::monostate) { return std::string(); },
                        [](long long v) { return std::to_string(v); },
                        [](double v) { return csv_field(format_double(v)); },
                        [](const std::string& s) { return csv_field(s); },
                    },
                    cell);
}

std::string json_cell(const Cell& cell) {
  return std::visit(Overloaded{
                        [](std::monostate) { return std::string("null"); },
                        [](long long v) { return std::to_string(v); },
                        [](double v) {
                          return std::isfinite(v) ? format_double(v) : std::string("null");
                        },
                        [](const std::string& s) { return nlohmann::json(s).dump(); },
                    },
                    cell);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("model")) c.model = model_from_json(inline_or_file(j["model"], base_dir));

    if (j.contains("input") && j.contains("inputs")) config_error("give 'input' or 'inputs', not both");
    if (j.contains("input")) {
      c.inputs.push_back(input_from_json(inline_or_file(j["input"], base_dir)));
    } else if (j.contains("inputs")) {
      for (const auto& item : j["inputs"]) {
        c.inputs.push_back(input_from_json(inline_or_file(item, base_dir)));
      }
      if (c.inputs.empty()) config_error("'inputs' must be non-empty");
    }

    if (j.contains("segmentation")) {
      const auto& s = j["segmentation"];
      const std::string kind = s.value("kind", std::string("singleton"));
      if (kind == "singleton") {
        c.segmentation = SingletonSegments{};
      } else if (kind == "grid") {
        c.segmentation = GridSegments{s.at("rows").get<int>(), s.at("cols").get<int>()};
      } else {
        config_error("unknown segmentation kind '" + kind + "'");
      }
    }

    if (j.contains("reference")) {
      const auto& r = j["reference"];
      if (r.is_string() && r.get<std::string>() == "mean") {
        c.reference = MeanReference{};
      } else if (r.is_string() && r.get<std::string>() == "zeros") {
        c.reference = ConstantReference{0.0};
      } else if (r.is_number()) {
        c.reference = ConstantReference{r.get<double>()};
      } else if (r.is_object() && r.contains("values")) {
        const auto v = r["values"].get<std::vector<double>>();
        c.reference = ExplicitReference{Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))};
      } else {
        config_error("reference must be \"mean\", \"zeros\", a number, or {\"values\": [...]}");
      }
    }

    if (j.contains("methods")) {
      for (const auto& m : j["methods"]) {
        MethodEntry entry;
        if (m.is_string()) {
          entry.kind = m.get<std::string>();
        } else {
          entry.kind = m.at("kind").get<std::string>();
          if (m.contains("sigma")) entry.sigma = m["sigma"].get<double>();
        }
        // Validates the kind (and a fixed sigma) early.
        method_from_json({{"kind", entry.kind}, {"sigma", entry.sigma.value_or(1.0)}});
        c.methods.push_back(std::move(entry));
      }
      if (c.methods.empty()) config_error("'methods' must be non-empty");
    }
    if (j.contains("sigmas")) {
      c.sigmas = non_empty_list<double>(j, "sigmas");
      for (double s : c.sigmas) {
        if (!(s > 0.0) || !std::isfinite(s)) config_error("sigmas must be positive");
      }
    }
    if (j.contains("sample_sizes")) {
      for (long long n : non_empty_list<long long>(j, "sample_sizes")) {
        if (n < 1) config_error("sample sizes must be >= 1");
        c.sample_sizes.push_back(static_cast<Eigen::Index>(n));
      }
    }
    if (j.contains("lambdas")) {
      c.lambdas = non_empty_list<double>(j, "lambdas");
      for (double l : c.lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) config_error("lambdas must be finite and >= 0");
      }
    }
    if (j.contains("lambda_convention")) {
      const std::string conv = j["lambda_convention"].get<std::string>();
      if (conv == "raw") {
        c.lambda_convention = LambdaConvention::kRaw;
      } else if (conv == "per_sample") {
        c.lambda_convention = LambdaConvention::kPerSample;
      } else {
        config_error("lambda_convention must be \"raw\" or \"per_sample\"");
      }
    }
    if (j.contains("seeds")) {
      c.seeds = non_empty_list<std::uint64_t>(j, "seeds");
      std::set<std::uint64_t> unique(c.seeds.begin(), c.seeds.end());
      if (unique.size() != c.seeds.size()) config_error("seeds must be distinct");
    }
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    c.ablations = j.value("ablations", false);
    if (j.contains("k")) {
      c.k = j["k"].get<int>();
      if (*c.k < 1) config_error("k must be >= 1");
    }
    c.use_abs = j.value("use_abs", false);
    if (j.contains("epsilons")) {
      c.epsilons = non_empty_list<double>(j, "epsilons");
      for (double e : c.epsilons) {
        if (!(e >= 0.0) || !std::isfinite(e)) config_error("epsilons must be finite and >= 0");
      }
    }
    if (j.contains("norms")) {
      c.norms.clear();
      for (const auto& name : non_empty_list<std::string>(j, "norms")) {
        c.norms.push_back(norm_from_name(name));
      }
    }
    if (j.contains("m")) {
      const long long m = j["m"].get<long long>();
      if (m < 1) config_error("m must be >= 1");
      c.m = static_cast<Eigen::Index>(m);
    }
    c.output = j.value("output", std::string());
    if (j.contains("format")) c.format = format_from_name(j["format"].get<std::string>());
    c.jobs = j.value("jobs", 1);
    if (c.jobs < 1) config_error("jobs must be >= 1");
    c.d = j.value("d", 20);
    if (c.d < 1) config_error("d must be >= 1");
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::filesystem::path p(path);
  return config_from_json(read_json_file(p), p.parent_path());
}

Table run_stability(const ExperimentConfig& config) {
  if (config.methods.empty()) config_error("stability needs at least one method");
  if (config.sample_sizes.empty()) config_error("stability needs sample_sizes");
  if (config.seeds.size() < 2) config_error("stability needs at least two distinct seeds");
  const auto inputs = prepare_all(config);

  struct CellSpec {
    MethodSpec method;
    double lambda;
    Eigen::Index n;
  };
  std::vector<CellSpec> cells;
  for (const MethodSpec& method : expand_methods(config)) {
    for (double lambda : config.lambdas)
      for (Eigen::Index n : config.sample_sizes) cells.push_back({method, lambda, n});
    const auto* lime = std::get_if<Lime>(&method);
    if (config.ablations && lime != nullptr && lime->weighted) {
      for (double lambda : config.lambdas)
        for (Eigen::Index n : config.sample_sizes)
          cells.push_back({Lime{lime->sigma, false}, lambda, n});
      if (std::find(config.lambdas.begin(), config.lambdas.end(), 0.0) == config.lambdas.end()) {
        for (Eigen::Index n : config.sample_sizes) cells.push_back({method, 0.0, n});
      }
    }
  }

  Table table;
  table.columns = {"method", "sigma", "lambda", "n", "k", "n_seeds", "mean_jaccard", "std", "error"};
  auto prefix = [&](const CellSpec& c) {
    return Row{method_name(c.method), sigma_cell(c.method), c.lambda,
               static_cast<long long>(c.n)};
  };
  table.rows = run_cells(
      config.jobs, cells.size(),
      [&](std::size_t i) {
        const CellSpec& c = cells[i];
        std::vector<double> pairs;
        std::vector<double> means;
        int k = 0;
        for (const PreparedInput& input : inputs) {
          std::vector<Explanation> runs;
          for (std::size_t r = 0; r < config.seeds.size(); ++r) {
            runs.push_back(explain(
                make_request(config, input, c.method, c.n, c.lambda, replicate_seed(config, r))));
          }
          const int d = input.seg.num_features();
          k = std::min(config.k.value_or(20), d);
          const StabilityReport report = top_k_jaccard(std::span<const Explanation>(runs), k,
                                                       config.use_abs);
          pairs.insert(pairs.end(), report.pair_values.begin(), report.pair_values.end());
          means.push_back(report.mean_jaccard);
        }
        Row row = prefix(c);
        row.insert(row.end(), {static_cast<long long>(k),
                               static_cast<long long>(config.seeds.size()), mean_of(means),
                               std_of(pairs), std::monostate{}});
        return row;
      },
      [&](std::size_t i, const std::string& message) {
        Row row = prefix(cells[i]);
        row.insert(row.end(), {std::monostate{}, static_cast<long long>(config.seeds.size()),
                               std::monostate{}, std::monostate{}, message});
        return row;
      });
  return table;
}

Table run_convergence(const ExperimentConfig& config) {
  if (config.sample_sizes.empty()) config_error("convergence needs sample_sizes");
  if (config.sigmas.empty()) config_error("convergence needs a sigma grid");
  const auto inputs = prepare_all(config);
  const PreparedInput& input = inputs.front();
  const std::uint64_t seed = replicate_seed(config, 0);

  struct CellSpec {
    double sigma;
    double lambda;
    Eigen::Index n;
  };
  std::vector<CellSpec> cells;
  for (double sigma : config.sigmas)
    for (double lambda : config.lambdas)
      for (Eigen::Index n : config.sample_sizes) cells.push_back({sigma, lambda, n});

  Table table;
  table.columns = {"sigma", "lambda", "n", "mse", "mae", "pearson", "spearman",
                   "mse_decreasing", "error"};
  std::vector<double> mses(cells.size(), std::nan(""));
  table.rows = run_cells(
      config.jobs, cells.size(),
      [&](std::size_t i) {
        const CellSpec& c = cells[i];
        const Explanation lime =
            explain(make_request(config, input, Lime{c.sigma}, c.n, c.lambda, seed));
        const Explanation binomial =
            explain(make_request(config, input, GlimeBinomial{c.sigma}, c.n, c.lambda, seed));
        const DistanceReport dist = explanation_distance(lime, binomial);
        mses[i] = dist.mse;
        return Row{c.sigma,    c.lambda,      static_cast<long long>(c.n), dist.mse,
                   dist.mae,   dist.pearson,  dist.spearman,               std::monostate{},
                   std::monostate{}};
      },
      [&](std::size_t i, const std::string& message) {
        const CellSpec& c = cells[i];
        return Row{c.sigma,          c.lambda,         static_cast<long long>(c.n),
                   std::monostate{}, std::monostate{}, std::monostate{},
                   std::monostate{}, std::monostate{}, message};
      });

  // Trend summary per (sigma, lambda) group, in grid order of n.
  const std::size_t group = config.sample_sizes.size();
  for (std::size_t start = 0; start < cells.size(); start += group) {
    bool decreasing = true;
    for (std::size_t i = start; i < start + group; ++i) {
      if (std::isnan(mses[i]) || (i > start && !(mses[i] < mses[i - 1]))) decreasing = false;
    }
    for (std::size_t i = start; i < start + group; ++i) {
      table.rows[i][7] = std::string(decreasing ? "true" : "false");
    }
  }
  return table;
}

Table run_fidelity(const ExperimentConfig& config) {
  if (config.methods.empty()) config_error("fidelity needs at least one method");
  if (config.sample_sizes.empty()) config_error("fidelity needs sample_sizes");
  if (config.epsilons.empty()) config_error("fidelity needs an epsilon grid");
  const auto inputs = prepare_all(config);
  const std::uint64_t seed = replicate_seed(config, 0);

  struct CellSpec {
    MethodSpec method;
    double lambda;
    Eigen::Index n;
    double epsilon;
    BallNorm norm;
  };
  std::vector<CellSpec> cells;
  for (const MethodSpec& method : expand_methods(config))
    for (double lambda : config.lambdas)
      for (Eigen::Index n : config.sample_sizes)
        for (double eps : config.epsilons)
          for (BallNorm norm : config.norms) cells.push_back({method, lambda, n, eps, norm});

  Table table;
  table.columns = {"method", "sigma",         "lambda",       "n",      "epsilon",
                   "norm",   "fidelity_mean", "fidelity_std", "inputs", "error"};
  auto prefix = [&](const CellSpec& c) {
    return Row{method_name(c.method),       sigma_cell(c.method), c.lambda,
               static_cast<long long>(c.n), c.epsilon,            norm_name(c.norm)};
  };
  table.rows = run_cells(
      config.jobs, cells.size(),
      [&](std::size_t i) {
        const CellSpec& c = cells[i];
        std::vector<double> values;
        for (const PreparedInput& input : inputs) {
          const Explanation e =
              explain(make_request(config, input, c.method, c.n, c.lambda, seed));
          values.push_back(local_fidelity(config.model, input.x, e, input.seg, c.epsilon, c.norm,
                                          config.m, splitmix64(seed))
                               .fidelity);
        }
        Row row = prefix(c);
        row.insert(row.end(), {mean_of(values), std_of(values),
                               static_cast<long long>(inputs.size()), std::monostate{}});
        return row;
      },
      [&](std::size_t i, const std::string& message) {
        Row row = prefix(cells[i]);
        row.insert(row.end(), {std::monostate{}, std::monostate{},
                               static_cast<long long>(inputs.size()), message});
        return row;
      });
  return table;
}

Table run_distributions(const ExperimentConfig& config) {
  const std::vector<double> sigmas =
      config.sigmas.empty() ? std::vector<double>{0.25, 0.5, 1.0, 5.0} : config.sigmas;
  const int d = config.d;
  Table table;
  table.columns = {"d",          "sigma",           "k",
                   "binomial_pmf", "uniform_pmf",   "exp_kernel_weight",
                   "shap_kernel_weight", "expected_weight_uniform"};
  for (double sigma : sigmas) {
    const double expected = expected_weight_uniform(d, sigma);
    for (int k = 0; k <= d; ++k) {
      Vector mask = Vector::Zero(d);
      mask.head(k).setOnes();
      Cell shap = std::monostate{};
      if (k > 0 && k < d) shap = weight(ShapKernel{}, mask);
      table.rows.push_back(Row{static_cast<long long>(d), sigma, static_cast<long long>(k),
                               binomial_pmf(d, sigma, k),
                               std::exp(log_binomial_coefficient(d, k) - d * std::log(2.0)),
                               weight(ExpKernel{sigma}, mask), shap, expected});
    }
  }
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

OutputFormat format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  config_error("format must be csv or json, got '" + name + "'");
}

std::string render(const Table& table, OutputFormat format) {
  if (table.rows.empty()) throw Error(ErrorCode::kInvalidArgument, "refusing to emit an empty table");
  std::ostringstream out;
  if (format == OutputFormat::kCsv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? "," : "") << csv_field(table.columns[c]);
    }
    out << "\r\n";
    for (const Row& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
      out << "\r\n";
    }
    return out.str();
  }
  out << "[\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? ", " : "") << nlohmann::json(table.columns[c]).dump() << ": "
          << json_cell(table.rows[r][c]);
    }
    out << (r + 1 < table.rows.size() ? "},\n" : "}\n");
  }
  out << "]\n";
  return out.str();
}

void emit(const Table& table, OutputFormat format, const std::string& path) {
  const std::string text = render(table, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write to " + path + " failed");
}

}  // namespace glime
