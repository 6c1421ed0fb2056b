// Copyright 2026 The dpgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the experiment runner.

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dpgan/errors.h"
#include "dpgan/experiment.h"

namespace {

std::string FlagValue(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private WGAN-GP experiments"};
  app.option_defaults()->always_capture_default();

  std::string config_path;
  std::optional<std::string> mode, out, groups_name, accounting, noising;
  std::optional<std::uint64_t> seed, groups, warm_iters, steps;
  std::optional<double> sigma, clip, epsilon, delta, q;
  std::vector<std::string> sets;

  app.add_option("--config", config_path, "Flat key = value config file");
  app.add_option("--mode", mode, "Pipeline to run")
      ->check(CLI::IsMember({"nonprivate", "basic", "advanced", "semi",
                             "evaluate", "calibrate"}));
  app.add_option("--seed", seed, "Seed for data, initialization and training");
  app.add_option("--out", out, "Output directory");
  app.add_option("--sigma", sigma, "Noise multiplier (dp.sigma)");
  app.add_option("--clip", clip, "Clipping bound (dp.clip)");
  app.add_option("--groups", groups, "Number of clipping groups (dp.groups)");
  app.add_option("--grouping", groups_name,
                 "Grouping strategy: global, weight_bias or clustered");
  app.add_option("--epsilon", epsilon, "Privacy budget epsilon");
  app.add_option("--delta", delta, "Privacy budget delta");
  app.add_option("--warm-iters", warm_iters, "Warm-start iterations");
  app.add_option("--accounting", accounting, "Group accounting mode")
      ->check(CLI::IsMember({"sound", "paper"}));
  app.add_option("--noising", noising, "Where noise is added")
      ->check(CLI::IsMember({"per_batch", "per_example"}));
  app.add_option("--q", q, "Sampling ratio (calibrate mode)");
  app.add_option("--steps", steps, "Step count (calibrate mode)");
  app.add_option("--set", sets, "Extra key=value override, repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    dpgan::ExperimentConfig config;
    if (!config_path.empty()) config = dpgan::LoadConfigFile(config_path);

    std::vector<std::pair<std::string, std::string>> overrides;
    if (mode) overrides.emplace_back("mode", *mode);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (out) overrides.emplace_back("out", *out);
    if (sigma) overrides.emplace_back("dp.sigma", FlagValue(*sigma));
    if (clip) overrides.emplace_back("dp.clip", FlagValue(*clip));
    if (groups) overrides.emplace_back("dp.groups", std::to_string(*groups));
    if (groups_name) overrides.emplace_back("dp.grouping", *groups_name);
    if (warm_iters) {
      overrides.emplace_back("dp.warm_iters", std::to_string(*warm_iters));
    }
    if (accounting) overrides.emplace_back("dp.accounting", *accounting);
    if (noising) overrides.emplace_back("dp.noising", *noising);
    for (const auto& kv : overrides) dpgan::SetConfigValue(config, kv.first, kv.second);

    // Budget flags feed whichever section the selected mode reads.
    const bool calibrate = config.mode == dpgan::RunMode::kCalibrate;
    if (epsilon) {
      dpgan::SetConfigValue(config, calibrate ? "calibrate.epsilon" : "dp.epsilon",
                            FlagValue(*epsilon));
    }
    if (delta) {
      dpgan::SetConfigValue(config, calibrate ? "calibrate.delta" : "dp.delta",
                            FlagValue(*delta));
    }
    if (q) dpgan::SetConfigValue(config, "calibrate.q", FlagValue(*q));
    if (steps) dpgan::SetConfigValue(config, "calibrate.steps", std::to_string(*steps));
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw dpgan::ConfigError(s, "--set expects key=value");
      }
      dpgan::SetConfigValue(config, s.substr(0, eq), s.substr(eq + 1));
    }

    const dpgan::RunOutcome outcome = dpgan::RunExperiment(config, std::cout);
    return outcome.exit_code;
  } catch (const std::exception& e) {
    const int code = dpgan::ExitCodeForCurrentException();
    std::cerr << "error: " << e.what() << '\n';
    return code;
  }
}
