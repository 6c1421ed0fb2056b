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

#include "dpgan/experiment.h"

#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dpgan/accountant.h"
#include "dpgan/checkpoint.h"
#include "dpgan/errors.h"

namespace dpgan {
namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ToDouble(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ConfigError(key, "expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t ToUnsigned(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool ToBool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + s + "'");
}

std::vector<std::size_t> ToSizes(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  if (s == "none") return out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::uint64_t v = ToUnsigned(key, part);
    if (v == 0) throw ConfigError(key, "layer widths must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

std::string FromSizes(const std::vector<std::size_t>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

// Wraps a library name parser so its failure names the config key.
template <typename Fn>
auto Named(const std::string& key, const std::string& value, Fn parse) {
  try {
    return parse(value);
  } catch (const ContractError& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define DPGAN_DOUBLE(KEY, EXPR)                                               \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.EXPR = ToDouble(k, v);                                            \
        },                                                                    \
        [](const ExperimentConfig& c) { return FormatDouble(c.EXPR); }}
#define DPGAN_UINT(KEY, EXPR, TYPE)                                           \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.EXPR = static_cast<TYPE>(ToUnsigned(k, v));                       \
        },                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.EXPR); }}
#define DPGAN_BOOL(KEY, EXPR)                                                 \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.EXPR = ToBool(k, v);                                              \
        },                                                                    \
        [](const ExperimentConfig& c) {                                       \
          return std::string(c.EXPR ? "true" : "false");                      \
        }}
#define DPGAN_STRING(KEY, EXPR)                                               \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string&, const std::string& v) {   \
          c.EXPR = v;                                                         \
        },                                                                    \
        [](const ExperimentConfig& c) { return c.EXPR; }}
#define DPGAN_SIZES(KEY, EXPR)                                                \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.EXPR = ToSizes(k, v);                                             \
        },                                                                    \
        [](const ExperimentConfig& c) { return FromSizes(c.EXPR); }}
#define DPGAN_ENUM(KEY, EXPR, PARSE, NAME)                                    \
  Field{KEY,                                                                  \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
          c.EXPR = Named(k, v, [](const std::string& s) { return PARSE(s); }); \
        },                                                                    \
        [](const ExperimentConfig& c) { return std::string(NAME(c.EXPR)); }}

// The echo order follows this table.
const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Field{"mode",
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
              c.mode = ParseRunMode(v);
            },
            [](const ExperimentConfig& c) {
              return std::string(RunModeName(c.mode));
            }},
      DPGAN_UINT("seed", seed, std::uint64_t),
      DPGAN_STRING("out", out_dir),

      DPGAN_ENUM("data.family", data.toy.family, ParseToyFamily, ToyFamilyName),
      Field{"data.modes",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.data.toy.modes = static_cast<int>(ToUnsigned(k, v));
            },
            [](const ExperimentConfig& c) {
              return std::to_string(c.data.toy.modes);
            }},
      DPGAN_DOUBLE("data.radius", data.toy.radius),
      DPGAN_DOUBLE("data.std", data.toy.std),
      DPGAN_UINT("data.n", data.toy.n, std::size_t),
      DPGAN_STRING("data.csv", data.csv_path),
      DPGAN_BOOL("data.csv_header", data.csv.header),
      DPGAN_BOOL("data.csv_labeled", data.csv.labeled),
      DPGAN_BOOL("data.csv_pixels", data.csv.pixels),
      DPGAN_DOUBLE("data.public_fraction", data.public_fraction),

      DPGAN_UINT("model.latent_dim", model.latent_dim, std::size_t),
      DPGAN_SIZES("model.g_hidden", model.g_hidden),
      DPGAN_SIZES("model.d_hidden", model.d_hidden),
      DPGAN_ENUM("model.g_activation", model.g_activation, ParseActivation,
                 ActivationName),
      DPGAN_ENUM("model.d_activation", model.d_activation, ParseActivation,
                 ActivationName),

      DPGAN_DOUBLE("gan.lambda_gp", gan.lambda_gp),
      DPGAN_UINT("gan.n_critic", gan.n_critic, std::size_t),
      DPGAN_UINT("gan.m", gan.m, std::size_t),
      DPGAN_UINT("gan.m_pub", gan.m_pub, std::size_t),
      DPGAN_UINT("gan.max_iters", gan.max_iters, std::size_t),
      DPGAN_DOUBLE("gan.divergence_norm", gan.divergence_norm),

      DPGAN_DOUBLE("adam.alpha", gan.adam.learning_rate),
      DPGAN_DOUBLE("adam.beta1", gan.adam.beta1),
      DPGAN_DOUBLE("adam.beta2", gan.adam.beta2),
      DPGAN_DOUBLE("adam.eps", gan.adam.eps_stab),

      DPGAN_DOUBLE("dp.sigma", gan.sigma),
      DPGAN_DOUBLE("dp.clip", gan.clip_c),
      DPGAN_DOUBLE("dp.clip_bias", gan.clip_bias),
      DPGAN_DOUBLE("dp.epsilon", gan.budget.epsilon0),
      DPGAN_DOUBLE("dp.delta", gan.budget.delta0),
      DPGAN_UINT("dp.groups", gan.k, std::size_t),
      DPGAN_ENUM("dp.grouping", gan.grouping, ParseGrouping, GroupingName),
      DPGAN_UINT("dp.warm_iters", gan.t_warm, std::size_t),
      DPGAN_ENUM("dp.noising", gan.noising, ParseNoisingMode, NoisingModeName),
      DPGAN_ENUM("dp.accounting", gan.accounting, ParseAccountingMode,
                 AccountingModeName),
      DPGAN_BOOL("dp.adaptive", gan.adaptive_clipping),
      DPGAN_UINT("dp.refresh_stride", gan.refresh_stride, std::size_t),
      DPGAN_UINT("dp.max_lambda", max_lambda, int),

      DPGAN_DOUBLE("semi.p_s_final", semi.semi.p_s_final),
      DPGAN_DOUBLE("semi.ramp_start_fraction", semi.semi.ramp_start_fraction),
      DPGAN_UINT("semi.m", semi.semi.m, std::size_t),
      DPGAN_UINT("semi.total_iters", semi.semi.total_iters, std::size_t),
      DPGAN_DOUBLE("semi.alpha", semi.semi.adam.learning_rate),
      DPGAN_SIZES("semi.hidden", semi.semi.hidden),
      DPGAN_BOOL("semi.soft", semi.semi.soft_pseudo_labels),
      DPGAN_UINT("semi.labeled", semi.labeled, std::size_t),

      DPGAN_UINT("eval.samples", eval.samples, std::size_t),
      DPGAN_BOOL("eval.js", eval.js),
      DPGAN_BOOL("eval.inception", eval.inception),
      DPGAN_BOOL("eval.coverage", eval.coverage),
      DPGAN_STRING("eval.generator", eval.generator),
      DPGAN_DOUBLE("eval.classifier_target", eval.classifier_target),

      DPGAN_DOUBLE("calibrate.q", calibrate.q),
      DPGAN_UINT("calibrate.steps", calibrate.steps, std::uint64_t),
      DPGAN_DOUBLE("calibrate.epsilon", calibrate.budget.epsilon0),
      DPGAN_DOUBLE("calibrate.delta", calibrate.budget.delta0),
  };
  return fields;
}

#undef DPGAN_DOUBLE
#undef DPGAN_UINT
#undef DPGAN_BOOL
#undef DPGAN_STRING
#undef DPGAN_SIZES
#undef DPGAN_ENUM

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  std::mt19937_64 gen(seq);
  return gen();
}

enum Stream : std::uint32_t {
  kModelInit = 1,
  kSamples = 2,
  kProbe = 3,
  kClassifier = 4,
  kRealDraw = 5,
  kSemiSplit = 6,
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
  if (!out) throw Error("failed writing: " + path);
}

void AppendText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
  if (!out) throw Error("failed writing: " + path);
}

std::string MetricsText(const std::vector<MetricRecord>& records) {
  std::string out;
  for (const MetricRecord& r : records) {
    out += FormatMetricRecord(r);
    out += '\n';
  }
  return out;
}

Dataset LoadData(const ExperimentConfig& config) {
  if (!config.data.csv_path.empty()) {
    return ReadCsv(config.data.csv_path, config.data.csv);
  }
  ToySpec spec = config.data.toy;
  spec.seed = config.seed;
  return MakeToy(spec);
}

GanConfig TrainingConfig(const ExperimentConfig& config) {
  GanConfig gan = config.gan;
  gan.seed = config.seed;
  return gan;
}

GanModel NewModel(const ExperimentConfig& config, std::size_t data_dim) {
  std::mt19937_64 rng(DeriveSeed(config.seed, kModelInit));
  return GanModel::Create(config.model.latent_dim, data_dim,
                          config.model.g_hidden, config.model.d_hidden,
                          config.model.g_activation,
                          config.model.d_activation, rng);
}

std::size_t SampleCount(const ExperimentConfig& config, const Dataset& data) {
  return config.eval.samples > 0 ? config.eval.samples : 10 * data.n();
}

// Scores `samples` against `data` with the enabled metrics.
ScoreReport Score(const ExperimentConfig& config, const Dataset& data,
                  const Tensor& samples, std::ostream& log) {
  ScoreReport report;
  const bool toy = config.data.csv_path.empty();
  if (config.eval.coverage && toy) {
    ToySpec spec = config.data.toy;
    spec.seed = config.seed;
    const auto centers = ModeCenters(spec);
    if (!centers.empty()) {
      report.mode_coverage = ModeCoverage(samples, centers, spec.std);
      report.high_quality_fraction =
          HighQualityFraction(samples, centers, spec.std);
    }
  }
  if (config.eval.js) {
    JsConfig js;
    js.seed = DeriveSeed(config.seed, kProbe);
    report.js = JsQualityScore(data.points(), samples, js);
    report.has_js = true;
  }
  if (config.eval.inception && data.has_labels() && data.num_classes() >= 2 &&
      data.n() >= 10) {
    std::vector<std::size_t> idx(data.n());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(DeriveSeed(config.seed, kClassifier));
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = data.n() * 4 / 5;
    const Dataset train =
        data.Subset(std::span<const std::size_t>(idx).first(n_train));
    const Dataset valid =
        data.Subset(std::span<const std::size_t>(idx).subspan(n_train));
    ClassifierConfig cc;
    cc.target_accuracy = config.eval.classifier_target;
    const ProbClassifier clf = TrainClassifier(train, &valid, cc, rng());
    const double acc = Accuracy(clf, valid);
    log << "classifier validation accuracy " << FormatDouble(acc) << '\n';
    if (acc < config.eval.classifier_target) {
      log << "notice: classifier is below the target accuracy "
          << FormatDouble(config.eval.classifier_target) << '\n';
    }
    report.inception = InceptionStyleScore(samples, clf);
    report.has_inception = true;
  }
  return report;
}

void WriteScores(const ExperimentConfig& config, const Dataset& data,
                 const Tensor& samples, RunArtifacts& art, std::ostream& log) {
  const ScoreReport report = Score(config, data, samples, log);
  const std::string record = report.ToRecord() + "\n";
  WriteText(art.scores, record);
  AppendText(art.metrics, record);
  log << record;
}

void WriteSamples(const ExperimentConfig& config, const GanModel& model,
                  const Dataset& data, RunArtifacts& art, std::ostream& log) {
  std::mt19937_64 rng(DeriveSeed(config.seed, kSamples));
  const Tensor samples = Generate(model, SampleCount(config, data), rng);
  WriteCsv(samples, art.samples);
  WriteScores(config, data, samples, art, log);
}

void WriteModel(const GanModel& model, const RunArtifacts& art) {
  SaveCheckpoint(model.generator, art.generator_checkpoint);
  SaveCheckpoint(model.discriminator, art.discriminator_checkpoint);
}

std::string Path(const ExperimentConfig& config, const char* name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

StopReason RunTraining(const ExperimentConfig& config, RunArtifacts& art,
                       std::ostream& log) {
  const Dataset data = LoadData(config);
  const GanConfig gan = TrainingConfig(config);
  GanModel model = NewModel(config, data.d());
  TrainReport report;
  if (config.mode == RunMode::kNonPrivate) {
    report = TrainNonPrivate(model, data, gan);
  } else {
    const DataSplit split = SplitPublicPrivate(
        data, SplitSpec{config.data.public_fraction, config.seed});
    LogMomentLedger ledger(config.max_lambda);
    art.ledger = Path(config, "ledger.txt");
    try {
      if (config.mode == RunMode::kBasic) {
        report = TrainBasic(model, split.private_data, gan, ledger);
      } else {
        report = TrainAdvanced(model, split.private_data, &split.public_data,
                               gan, ledger);
      }
    } catch (...) {
      WriteText(art.ledger, ledger.Export());
      throw;
    }
    WriteText(art.ledger, ledger.Export());
    log << "epsilon consumed " << FormatDouble(report.epsilon_consumed)
        << " at delta " << FormatDouble(gan.budget.delta0) << '\n';
  }
  WriteText(art.metrics,
            MetricsText(report.warm_metrics) + MetricsText(report.metrics));
  for (const std::string& n : report.notices) log << "notice: " << n << '\n';
  log << "stop reason " << StopReasonName(report.stop_reason) << " after "
      << report.iterations_run << " iterations\n";
  WriteModel(model, art);
  if (report.stop_reason == StopReason::kDiverged) {
    log << "diverged: " << report.divergence_message << '\n';
    return report.stop_reason;
  }
  WriteSamples(config, model, data, art, log);
  return report.stop_reason;
}

GanModel LoadGenerator(const std::string& path, std::size_t data_dim) {
  GanModel model;
  model.generator = LoadCheckpoint(path);
  model.latent_dim = model.generator.input_size();
  if (model.generator.output_size() != data_dim) {
    throw DimensionError("generator in " + path + " emits " +
                         std::to_string(model.generator.output_size()) +
                         " values per sample, data has " +
                         std::to_string(data_dim));
  }
  return model;
}

void RunEvaluate(const ExperimentConfig& config, RunArtifacts& art,
                 std::ostream& log) {
  if (config.eval.generator.empty()) {
    throw ConfigError("eval.generator", "evaluate mode needs a checkpoint");
  }
  const Dataset data = LoadData(config);
  WriteText(art.metrics, "");
  if (config.eval.generator == "real") {
    if (!config.data.csv_path.empty()) {
      throw ConfigError("eval.generator", "'real' needs a toy dataset");
    }
    ToySpec spec = config.data.toy;
    spec.seed = DeriveSeed(config.seed, kRealDraw);
    spec.n = SampleCount(config, data);
    const Tensor samples = MakeToy(spec).points();
    WriteCsv(samples, art.samples);
    WriteScores(config, data, samples, art, log);
    return;
  }
  const GanModel model = LoadGenerator(config.eval.generator, data.d());
  std::mt19937_64 rng(DeriveSeed(config.seed, kSamples));
  const Tensor samples = Generate(model, SampleCount(config, data), rng);
  WriteCsv(samples, art.samples);
  WriteScores(config, data, samples, art, log);
}

StopReason RunSemi(const ExperimentConfig& config, RunArtifacts& art,
                   std::ostream& log) {
  const Dataset data = LoadData(config);
  if (!data.has_labels()) {
    throw ConfigError("data", "semi mode needs labeled data");
  }
  if (config.semi.labeled == 0 || config.semi.labeled >= data.n()) {
    throw ConfigError("semi.labeled", "must lie between 1 and n - 1");
  }
  GanModel model;
  StopReason stop = StopReason::kMaxIters;
  if (config.eval.generator.empty()) {
    model = NewModel(config, data.d());
    const TrainReport report = TrainNonPrivate(model, data, TrainingConfig(config));
    WriteText(art.metrics, MetricsText(report.metrics));
    WriteModel(model, art);
    stop = report.stop_reason;
    if (stop == StopReason::kDiverged) {
      log << "diverged: " << report.divergence_message << '\n';
      return stop;
    }
  } else {
    model = LoadGenerator(config.eval.generator, data.d());
    WriteText(art.metrics, "");
  }

  std::vector<std::size_t> idx(data.n());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(DeriveSeed(config.seed, kSemiSplit));
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::span<const std::size_t> all(idx);
  const Dataset labeled = data.Subset(all.first(config.semi.labeled));
  const Dataset held_out = data.Subset(all.subspan(config.semi.labeled));

  const SemiResult semi = TrainSemiSupervised(
      model.generator, model.latent_dim, labeled, config.semi.semi, config.seed);
  const SemiResult plain =
      TrainSupervised(labeled, config.semi.semi, config.seed);
  const std::string record =
      "semi accuracy_semi=" + FormatDouble(Accuracy(semi.c1, held_out)) +
      " accuracy_supervised=" + FormatDouble(Accuracy(plain.c1, held_out)) +
      " labeled=" + std::to_string(config.semi.labeled) + "\n";
  WriteText(art.scores, record);
  AppendText(art.metrics, record);
  log << record;
  return stop;
}

void RunCalibrate(const ExperimentConfig& config, RunArtifacts& art,
                  std::ostream& log) {
  const CalibrateConfig& c = config.calibrate;
  const double sigma = SigmaForBudget(c.q, c.steps, c.budget);
  const double eps = EpsilonAfter(c.q, sigma, c.steps, c.budget.delta0);
  const std::string text = "sigma=" + FormatDouble(sigma) +
                           " epsilon=" + FormatDouble(eps) +
                           " q=" + FormatDouble(c.q) +
                           " steps=" + std::to_string(c.steps) +
                           " delta=" + FormatDouble(c.budget.delta0) + "\n";
  WriteText(art.calibration, text);
  log << text;
}

}  // namespace

const char* RunModeName(RunMode mode) {
  switch (mode) {
    case RunMode::kNonPrivate: return "nonprivate";
    case RunMode::kBasic: return "basic";
    case RunMode::kAdvanced: return "advanced";
    case RunMode::kSemi: return "semi";
    case RunMode::kEvaluate: return "evaluate";
    case RunMode::kCalibrate: return "calibrate";
  }
  return "?";
}

RunMode ParseRunMode(const std::string& name) {
  for (RunMode m : {RunMode::kNonPrivate, RunMode::kBasic, RunMode::kAdvanced,
                    RunMode::kSemi, RunMode::kEvaluate, RunMode::kCalibrate}) {
    if (name == RunModeName(m)) return m;
  }
  throw ConfigError("mode", "unknown mode '" + name + "'");
}

void ExperimentConfig::Validate() const {
  if (out_dir.empty()) throw ConfigError("out", "must not be empty");
  if (mode == RunMode::kCalibrate) {
    if (!(calibrate.q > 0.0 && calibrate.q <= 1.0)) {
      throw ConfigError("calibrate.q", "must lie in (0, 1]");
    }
    if (calibrate.steps == 0) throw ConfigError("calibrate.steps", "must be positive");
    if (!(calibrate.budget.epsilon0 > 0.0)) {
      throw ConfigError("calibrate.epsilon", "must be > 0");
    }
    if (!(calibrate.budget.delta0 > 0.0 && calibrate.budget.delta0 < 1.0)) {
      throw ConfigError("calibrate.delta", "must lie in (0, 1)");
    }
    return;
  }
  if (data.csv_path.empty()) {
    try {
      data.toy.Validate();
    } catch (const ContractError& e) {
      throw ConfigError("data", e.what());
    }
  }
  if (mode == RunMode::kBasic || mode == RunMode::kAdvanced) {
    if (!(data.public_fraction > 0.0 && data.public_fraction < 1.0)) {
      throw ConfigError("data.public_fraction", "must lie in (0, 1)");
    }
  }
  if (model.latent_dim == 0) {
    throw ConfigError("model.latent_dim", "must be positive");
  }
  if (!(eval.classifier_target > 0.0 && eval.classifier_target <= 1.0)) {
    throw ConfigError("eval.classifier_target", "must lie in (0, 1]");
  }
  if (max_lambda < 1 || max_lambda > 4096) {
    throw ConfigError("dp.max_lambda", "must lie in [1, 4096]");
  }
  gan.Validate();
  if (mode == RunMode::kSemi) semi.semi.Validate();
}

void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  for (const Field& f : Fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError(key, "unknown configuration key");
}

ExperimentConfig ParseConfigText(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    }
    SetConfigValue(config, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfigText(buf.str());
}

std::string ResolvedConfigText(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : Fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::string FormatMetricRecord(const MetricRecord& r) {
  return std::to_string(r.iter) + '\t' + r.phase + '\t' +
         FormatDouble(r.d_loss) + '\t' + FormatDouble(r.g_loss) + '\t' +
         FormatDouble(r.epsilon) + '\t' + FormatDouble(r.delta) + '\t' +
         r.bounds_digest;
}

MetricRecord ParseMetricRecord(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (cells.size() != 7) {
    throw FormatError("metric record needs 7 fields", 0);
  }
  MetricRecord r;
  try {
    r.iter = ToUnsigned("iter", cells[0]);
    r.phase = cells[1];
    r.d_loss = ToDouble("d_loss", cells[2]);
    r.g_loss = ToDouble("g_loss", cells[3]);
    r.epsilon = ToDouble("epsilon", cells[4]);
    r.delta = ToDouble("delta", cells[5]);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad metric field ") + e.what(), 0);
  }
  r.bounds_digest = cells[6];
  return r;
}

MetricsFile ReadMetricsFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open metrics file: " + path);
  MetricsFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("scores", 0) == 0 || line.rfind("semi ", 0) == 0) {
      file.score_lines.push_back(line);
      continue;
    }
    try {
      file.records.push_back(ParseMetricRecord(line));
    } catch (const FormatError& e) {
      throw FormatError(std::string(e.what()) + " in " + path, line_no);
    }
  }
  return file;
}

RunOutcome RunExperiment(const ExperimentConfig& config, std::ostream& log) {
  config.Validate();
  std::filesystem::create_directories(config.out_dir);
  RunOutcome outcome;
  RunArtifacts& art = outcome.artifacts;
  art.config_echo = Path(config, "config.txt");
  WriteText(art.config_echo, ResolvedConfigText(config));
  if (config.mode == RunMode::kCalibrate) {
    art.calibration = Path(config, "calibration.txt");
    RunCalibrate(config, art, log);
    return outcome;
  }
  art.metrics = Path(config, "metrics.tsv");
  art.samples = Path(config, "samples.csv");
  art.scores = Path(config, "scores.txt");
  if (config.mode != RunMode::kEvaluate) {
    art.generator_checkpoint = Path(config, "generator.ckpt");
    art.discriminator_checkpoint = Path(config, "discriminator.ckpt");
  }
  switch (config.mode) {
    case RunMode::kEvaluate:
      RunEvaluate(config, art, log);
      break;
    case RunMode::kSemi:
      outcome.stop_reason = RunSemi(config, art, log);
      break;
    default:
      outcome.stop_reason = RunTraining(config, art, log);
      break;
  }
  outcome.exit_code =
      outcome.stop_reason == StopReason::kDiverged ? kExitDiverged : kExitOk;
  return outcome;
}

int ExitCodeForCurrentException() {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const DivergenceError&) {
    return kExitDiverged;
  } catch (const BudgetExhaustedError&) {
    return kExitBudget;
  } catch (const CalibrationError&) {
    return kExitBudget;
  } catch (...) {
    return kExitOther;
  }
}

}  // namespace dpgan
