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

// Experiment runner behind the command-line tool: flat key=value configs,
// the training and evaluation pipelines, and the artifacts they write.

#ifndef DPGAN_EXPERIMENT_H_
#define DPGAN_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dpgan/datasets.h"
#include "dpgan/evaluation.h"
#include "dpgan/gan.h"

namespace dpgan {

enum class RunMode : std::uint8_t {
  kNonPrivate,
  kBasic,
  kAdvanced,
  kSemi,
  kEvaluate,
  kCalibrate,
};

const char* RunModeName(RunMode mode);
// Throws ConfigError("mode", ...) for unknown names.
RunMode ParseRunMode(const std::string& name);

struct DataConfig {
  ToySpec toy;
  // When set, points are read from this CSV instead of a toy generator.
  std::string csv_path;
  CsvOptions csv;
  double public_fraction = 0.02;
};

struct ModelConfig {
  std::size_t latent_dim = 16;
  std::vector<std::size_t> g_hidden = {64, 64};
  std::vector<std::size_t> d_hidden = {64, 64};
  Activation g_activation = Activation::kLeakyRelu;
  Activation d_activation = Activation::kLeakyRelu;
};

struct EvalConfig {
  // 0 means ten times the dataset size.
  std::size_t samples = 0;
  bool js = true;
  bool inception = true;
  bool coverage = true;
  // Generator checkpoint for evaluate and semi modes. The value "real"
  // in evaluate mode scores a fresh draw of real data instead.
  std::string generator;
  double classifier_target = 0.95;
};

struct SemiRunConfig {
  SemiConfig semi;
  // Labeled real points given to both classifiers; the rest of the data is
  // held out for accuracy.
  std::size_t labeled = 200;
};

struct CalibrateConfig {
  double q = 0.01;
  std::uint64_t steps = 1000;
  PrivacyBudget budget{2.0, 1e-5};
};

// Trainer defaults for desk-scale runs: penalty weight 1 instead of 10.
inline GanConfig DeskGanConfig() {
  GanConfig c;
  c.lambda_gp = 1.0;
  return c;
}

struct ExperimentConfig {
  RunMode mode = RunMode::kNonPrivate;
  std::uint64_t seed = 0;
  std::string out_dir = "dpgan_out";
  DataConfig data;
  ModelConfig model;
  GanConfig gan = DeskGanConfig();
  // Largest moment order tracked by the run's ledger.
  int max_lambda = kDefaultMaxLambda;
  SemiRunConfig semi;
  EvalConfig eval;
  CalibrateConfig calibrate;

  void Validate() const;
};

// Sets one dotted key. Throws ConfigError naming the key on unknown keys
// or unparsable values. "seed" drives the toy data, model initialization
// and every training stream.
void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Parses "key = value" lines; '#' starts a comment and blank lines are
// skipped. Later keys override earlier ones.
ExperimentConfig ParseConfigText(const std::string& text);
ExperimentConfig LoadConfigFile(const std::string& path);

// Every key with its resolved value, one "key = value" line each, in a
// fixed order. Feeding the text back to ParseConfigText reproduces the
// config.
std::string ResolvedConfigText(const ExperimentConfig& config);

// Metrics stream: one tab-separated line per record in the field order
// iter, phase, d_loss, g_loss, epsilon, delta, bounds digest. Lines
// starting with "scores" carry a ScoreReport record.
std::string FormatMetricRecord(const MetricRecord& record);
MetricRecord ParseMetricRecord(const std::string& line);

struct MetricsFile {
  std::vector<MetricRecord> records;
  std::vector<std::string> score_lines;
};
// Throws FormatError naming the line for malformed records.
MetricsFile ReadMetricsFile(const std::string& path);

struct RunArtifacts {
  std::string config_echo;
  std::string metrics;
  std::string generator_checkpoint;
  std::string discriminator_checkpoint;
  std::string samples;
  std::string scores;
  std::string ledger;
  std::string calibration;
};

struct RunOutcome {
  RunArtifacts artifacts;
  StopReason stop_reason = StopReason::kMaxIters;
  int exit_code = 0;
};

// Runs the configured pipeline, writing artifacts under out_dir and a
// short human-readable log to `log`. Library errors propagate; use
// ExitCodeFor to map them.
RunOutcome RunExperiment(const ExperimentConfig& config, std::ostream& log);

// 0 success, 2 configuration error, 3 divergence, 4 budget infeasible,
// 1 anything else.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitBudget = 4;
int ExitCodeForCurrentException();

}  // namespace dpgan

#endif  // DPGAN_EXPERIMENT_H_
