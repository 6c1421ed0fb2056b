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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dpgan/accountant.h"
#include "dpgan/errors.h"
#include "dpgan/experiment.h"

namespace dpgan {
namespace {

namespace fs = std::filesystem;

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string FreshDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dpgan_exp_" + name);
  fs::remove_all(p);
  return p.string();
}

ExperimentConfig Tiny(const std::string& out) {
  return ParseConfigText(
      "out = " + out + "\n"
      "data.n = 400\n"
      "model.g_hidden = 8\n"
      "model.d_hidden = 8\n"
      "gan.m = 16\n"
      "gan.n_critic = 2\n"
      "gan.max_iters = 5\n"
      "eval.samples = 200\n"
      "eval.inception = false\n");
}

TEST(ConfigParseTest, EchoRoundTrips) {
  ExperimentConfig c = ParseConfigText(
      "# comment\n"
      "mode = advanced\n"
      "seed = 42   # trailing comment\n"
      "\n"
      "dp.sigma = 0.75\n"
      "dp.grouping = clustered\n"
      "dp.groups = 4\n"
      "dp.adaptive = true\n"
      "model.d_hidden = 32,16\n"
      "adam.alpha = 0.0001\n");
  EXPECT_EQ(c.mode, RunMode::kAdvanced);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.gan.sigma, 0.75);
  EXPECT_EQ(c.model.d_hidden, (std::vector<std::size_t>{32, 16}));
  const std::string echo = ResolvedConfigText(c);
  EXPECT_EQ(ResolvedConfigText(ParseConfigText(echo)), echo);
  EXPECT_NE(echo.find("dp.accounting = sound\n"), std::string::npos);
}

TEST(ConfigParseTest, ErrorsNameTheField) {
  try {
    ParseConfigText("dp.sigma = lots\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "dp.sigma");
  }
  try {
    ParseConfigText("dp.sigmaa = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "dp.sigmaa");
  }
  try {
    ParseConfigText("dp.noising = sometimes\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "dp.noising");
  }
  EXPECT_THROW(ParseConfigText("just words\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("mode = train\n"), ConfigError);
}

TEST(MetricsTest, RecordRoundTrip) {
  const MetricRecord r{12, "dp", -0.1234567890123, 1e-300, 3.5, 2.5e-6, "k1:00ff"};
  const std::string line = FormatMetricRecord(r);
  EXPECT_EQ(ParseMetricRecord(line), r);
  EXPECT_THROW(ParseMetricRecord("1\tdp\t0"), FormatError);
}

TEST(RunTest, NonPrivateWritesEveryArtifact) {
  const std::string out = FreshDir("np");
  std::ostringstream log;
  const RunOutcome o = RunExperiment(Tiny(out), log);
  EXPECT_EQ(o.exit_code, kExitOk);
  for (const std::string& p :
       {o.artifacts.config_echo, o.artifacts.metrics, o.artifacts.samples,
        o.artifacts.scores, o.artifacts.generator_checkpoint,
        o.artifacts.discriminator_checkpoint}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  const MetricsFile m = ReadMetricsFile(o.artifacts.metrics);
  EXPECT_EQ(m.records.size(), 5u);
  EXPECT_EQ(m.score_lines.size(), 1u);
  std::ifstream samples(o.artifacts.samples);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(samples, line)) ++rows;
  EXPECT_EQ(rows, 200u);
}

TEST(RunTest, RepeatedRunsAreByteIdentical) {
  const std::string a = FreshDir("det_a"), b = FreshDir("det_b");
  ExperimentConfig ca = Tiny(a), cb = Tiny(b);
  SetConfigValue(ca, "mode", "basic");
  SetConfigValue(cb, "mode", "basic");
  std::ostringstream log;
  const RunOutcome oa = RunExperiment(ca, log);
  const RunOutcome ob = RunExperiment(cb, log);
  EXPECT_EQ(ReadAll(oa.artifacts.metrics), ReadAll(ob.artifacts.metrics));
  EXPECT_EQ(ReadAll(oa.artifacts.generator_checkpoint),
            ReadAll(ob.artifacts.generator_checkpoint));
  EXPECT_EQ(ReadAll(oa.artifacts.ledger), ReadAll(ob.artifacts.ledger));
  EXPECT_NO_THROW(LogMomentLedger::Import(ReadAll(oa.artifacts.ledger)));
}

TEST(RunTest, TinyBudgetStopsEarly) {
  const std::string out = FreshDir("budget");
  ExperimentConfig c = Tiny(out);
  SetConfigValue(c, "mode", "basic");
  SetConfigValue(c, "dp.epsilon", "0.1");
  SetConfigValue(c, "dp.sigma", "0.8");
  SetConfigValue(c, "gan.max_iters", "200");
  std::ostringstream log;
  // With orders up to 64 an empty ledger cannot certify epsilon 0.1 at
  // delta 1e-5, so the run is refused up front.
  EXPECT_THROW(RunExperiment(c, log), BudgetExhaustedError);
  SetConfigValue(c, "dp.max_lambda", "256");
  const RunOutcome o = RunExperiment(c, log);
  EXPECT_EQ(o.stop_reason, StopReason::kBudgetExhausted);
  EXPECT_EQ(o.exit_code, kExitOk);
  const MetricsFile m = ReadMetricsFile(o.artifacts.metrics);
  ASSERT_GE(m.records.size(), 1u);
  EXPECT_LT(m.records.size(), 200u);
  if (m.records.size() >= 2) {
    EXPECT_LE(m.records[m.records.size() - 2].epsilon, 0.1);
  }
}

TEST(RunTest, EvaluateReportsMissingCheckpointPath) {
  const std::string out = FreshDir("eval_missing");
  ExperimentConfig c = Tiny(out);
  SetConfigValue(c, "mode", "evaluate");
  SetConfigValue(c, "eval.generator", "/nonexistent/gen.ckpt");
  std::ostringstream log;
  try {
    RunExperiment(c, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/gen.ckpt"), std::string::npos);
  }
}

TEST(RunTest, EvaluateRealPassThrough) {
  const std::string out = FreshDir("eval_real");
  ExperimentConfig c = Tiny(out);
  SetConfigValue(c, "mode", "evaluate");
  SetConfigValue(c, "eval.generator", "real");
  SetConfigValue(c, "eval.samples", "400");
  std::ostringstream log;
  const RunOutcome o = RunExperiment(c, log);
  const std::string scores = ReadAll(o.artifacts.scores);
  EXPECT_NE(scores.find("mode_coverage=1"), std::string::npos) << scores;
}

TEST(RunTest, CalibrateWritesSigma) {
  const std::string out = FreshDir("cal");
  ExperimentConfig c = ParseConfigText("mode = calibrate\nout = " + out +
                                       "\ncalibrate.q = 0.01\ncalibrate.steps = 1000\n"
                                       "calibrate.epsilon = 2\n");
  std::ostringstream log;
  const RunOutcome o = RunExperiment(c, log);
  const double sigma = SigmaForBudget(0.01, 1000, PrivacyBudget{2.0, 1e-5});
  char buf[64];
  std::snprintf(buf, sizeof buf, "sigma=%.17g ", sigma);
  EXPECT_EQ(ReadAll(o.artifacts.calibration).rfind(buf, 0), 0u);
}

TEST(RunTest, ExitCodesByErrorKind) {
  auto code = [](auto thrower) {
    try {
      thrower();
    } catch (...) {
      return ExitCodeForCurrentException();
    }
    return -1;
  };
  EXPECT_EQ(code([] { throw ConfigError("x", "y"); }), kExitConfig);
  EXPECT_EQ(code([] { throw DivergenceError("x"); }), kExitDiverged);
  EXPECT_EQ(code([] { throw CalibrationError("x"); }), kExitBudget);
  EXPECT_EQ(code([] { throw BudgetExhaustedError("x"); }), kExitBudget);
  EXPECT_EQ(code([] { throw FormatError("x", 3); }), kExitOther);
}

}  // namespace
}  // namespace dpgan
