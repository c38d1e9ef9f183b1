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


// Command-line front end: one explanation, or one of the experiment sweeps.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "glime/error.hpp"
#include "glime/explain.hpp"
#include "glime/harness.hpp"
#include "json.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw glime::Error(glime::ErrorCode::kIoFailure, "cannot write " + path);
  }
}

nlohmann::json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw glime::Error(glime::ErrorCode::kConfigError, "cannot open config " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw glime::Error(glime::ErrorCode::kConfigError, path + " is not JSON");
  return j;
}

glime::ExperimentConfig make_config(const Options& opts) {
  glime::ExperimentConfig config =
      opts.config.empty() ? glime::ExperimentConfig{} : glime::load_config(opts.config);
  if (opts.seed) config.master_seed = *opts.seed;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (!opts.format.empty()) config.format = glime::format_from_name(opts.format);
  if (!opts.out.empty()) config.output = opts.out;
  return config;
}

int run_explain(const Options& opts) {
  if (opts.config.empty()) {
    throw glime::Error(glime::ErrorCode::kConfigError, "explain needs --config");
  }
  const nlohmann::json j = read_config_json(opts.config);
  glime::ExperimentConfig config = make_config(opts);
  if (config.inputs.size() != 1) {
    throw glime::Error(glime::ErrorCode::kConfigError, "explain needs exactly one input");
  }
  if (!j.contains("method")) {
    throw glime::Error(glime::ErrorCode::kConfigError, "explain needs a 'method'");
  }

  const glime::InputArray& input = config.inputs.front();
  glime::Segmentation seg = glime::Segmentation::singleton(input.values.size());
  if (const auto* grid = std::get_if<glime::GridSegments>(&config.segmentation)) {
    if (!input.shape) {
      throw glime::Error(glime::ErrorCode::kConfigError, "grid segmentation needs a shaped input");
    }
    seg = glime::grid_segment(input.shape->height, input.shape->width, input.shape->channels,
                              grid->rows, grid->cols);
  }
  glime::Reference ref = glime::mean_reference(input.values, seg);
  if (const auto* c = std::get_if<glime::ConstantReference>(&config.reference)) {
    ref.values.setConstant(c->value);
  } else if (const auto* e = std::get_if<glime::ExplicitReference>(&config.reference)) {
    ref.values = e->values;
  }

  glime::ExplainRequest request{config.model, input.values, seg, ref,
                                glime::method_from_json(j["method"])};
  try {
    request.n = j.value("n", static_cast<Eigen::Index>(1000));
    request.lambda = j.value("lambda", 1.0);
    request.seed = opts.seed.value_or(j.value("seed", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw glime::Error(glime::ErrorCode::kConfigError, e.what());
  }
  const glime::Explanation explanation = glime::explain(request);
  write_text(glime::explanation_to_json(explanation).dump(2) + "\n", config.output);
  return 0;
}

int run_table(const Options& opts, glime::Table (*runner)(const glime::ExperimentConfig&)) {
  const glime::ExperimentConfig config = make_config(opts);
  const glime::Table table = runner(config);
  if (config.output.empty() || config.output == "-") {
    std::cout << glime::render(table, config.format);
  } else {
    glime::emit(table, config.format, config.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local surrogate explanations and stability/fidelity experiments"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file");
    sub->add_option("--out", opts.out, "output path (stdout when omitted)");
    sub->add_option("--format", opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", opts.seed, "master seed override");
    sub->add_option("--jobs", opts.jobs, "worker threads for grid cells")->check(CLI::PositiveNumber);
  };
  CLI::App* explain = app.add_subcommand("explain", "compute one explanation");
  CLI::App* stability = app.add_subcommand("stability", "top-K Jaccard stability sweep");
  CLI::App* converge = app.add_subcommand("converge", "LIME vs GLIME-Binomial convergence");
  CLI::App* fidelity = app.add_subcommand("fidelity", "local fidelity sweep");
  CLI::App* distributions = app.add_subcommand("distributions", "pmf and kernel weight tables");
  for (CLI::App* sub : {explain, stability, converge, fidelity, distributions}) add_common(sub);
  for (CLI::App* sub : {stability, converge, fidelity}) sub->get_option("--config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (explain->parsed()) return run_explain(opts);
    if (stability->parsed()) return run_table(opts, glime::run_stability);
    if (converge->parsed()) return run_table(opts, glime::run_convergence);
    if (fidelity->parsed()) return run_table(opts, glime::run_fidelity);
    return run_table(opts, glime::run_distributions);
  } catch (const glime::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == glime::ErrorCode::kConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
