// Copyright 2026 The dpgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpgan/accountant.h"
#include "dpgan/errors.h"
#include "dpgan/evaluation.h"
#include "dpgan/experiment.h"
#include "dpgan/gan.h"
#include "dpgan/network.h"
#include "dpgan/sanitizer.h"
#include "oracles.h"
#include "test_util.h"

#ifndef DPGAN_CLI_PATH
#error "DPGAN_CLI_PATH must name the dpgan executable"
#endif

namespace dpgan {
namespace {

namespace fs = std::filesystem;

// Collects failed checks for one criterion; the first few are printed.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  void Note(const std::string& text) { notes_.push_back(text); }

  bool ok() const { return failures_.empty(); }
  std::string Summary() const {
    std::string s = std::to_string(checks_) + " checks";
    for (const std::string& n : notes_) s += "; " + n;
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) {
      s += "; failed: " + failures_[i];
    }
    if (failures_.size() > 3) {
      s += "; " + std::to_string(failures_.size() - 3) + " more failures";
    }
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string Fmt(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string Fmt(const char* format, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string FreshDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dpgan_accept_" + name);
  fs::remove_all(p);
  return p.string();
}

// Reads key=value from the first "scores" line of a run's scores file.
double ScoreValue(const std::string& scores_path, const std::string& key) {
  std::istringstream in(ReadAll(scores_path));
  std::string token;
  while (in >> token) {
    if (token.rfind(key + "=", 0) == 0) {
      return std::stod(token.substr(key.size() + 1));
    }
  }
  throw std::runtime_error("no " + key + " in " + scores_path);
}

// ---------------------------------------------------------------------------

void AccountantClosedForm(Checker& c, double seconds_limit) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    for (int lambda = 1; lambda <= 64; ++lambda) {
      const double got = SubsampledGaussianLogMoment(1.0, sigma, lambda);
      const double want = lambda * (lambda + 1.0) / (2.0 * sigma * sigma);
      worst = std::max(worst, std::abs(got - want));
      c.Expect(std::abs(got - want) <= 1e-9,
               Fmt("sigma %g lambda %g", sigma, lambda));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.Expect(secs < seconds_limit, Fmt("took %.2f s", secs));
  c.Note(Fmt("max abs error %.3g", worst));
}

void AccountantOracle(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double q : {0.005, 0.01, 0.05}) {
    for (double sigma : {0.5, 1.086, 2.0}) {
      for (int lambda : {2, 8, 16, 32}) {
        const double ref =
            oracle::SimpsonLogMoment(q, sigma, lambda, 1'000'001).alpha();
        const double got = SubsampledGaussianLogMoment(q, sigma, lambda);
        worst = std::max(worst, std::abs(got - ref));
        c.Expect(std::abs(got - ref) <= 1e-6,
                 Fmt("q %g sigma %g", q, sigma) + " lambda " +
                     std::to_string(lambda));
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.Expect(secs < 60.0, Fmt("took %.1f s", secs));
  c.Note(Fmt("max abs deviation %.3g", worst));
}

void BoundEnvelope(Checker& c) {
  std::size_t points = 0;
  double worst_ratio = 0.0;
  for (double sigma : {1.0, 1.5, 2.0, 4.0, 8.0}) {
    for (double q : {1e-4, 1e-3, 0.005, 0.01, 0.03, 0.06}) {
      if (q > 1.0 / (16.0 * sigma)) continue;
      const double lambda_max = sigma * sigma * std::log(1.0 / (q * sigma));
      for (int lambda = 1; lambda <= std::min(lambda_max, 128.0); ++lambda) {
        const double bound =
            q * q * lambda * (lambda + 1.0) / ((1.0 - q) * sigma * sigma);
        const double got = SubsampledGaussianLogMoment(q, sigma, lambda);
        worst_ratio = std::max(worst_ratio, got / bound);
        c.Expect(got <= 1.05 * bound, Fmt("q %g sigma %g", q, sigma) +
                                          " lambda " + std::to_string(lambda));
        ++points;
      }
    }
  }
  c.Expect(points > 100, "too few envelope points");
  c.Note(std::to_string(points) + " (q, sigma, lambda) points, max alpha/bound " +
         Fmt("%.4f", worst_ratio));
}

void CompositionAndQueries(Checker& c) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> uq(0.001, 0.05), us(0.6, 4.0);
  std::uniform_int_distribution<int> ut(1, 2000);
  for (int i = 0; i < 200; ++i) {
    const double q = uq(rng), sigma = us(rng);
    const auto t = static_cast<std::uint64_t>(ut(rng));
    // One event of count t against the same steps in random chunks.
    NoiseEvent e;
    e.q = q;
    e.sigma = sigma;
    e.count = t;
    LogMomentLedger whole, chunks;
    whole.Accumulate(e);
    std::uint64_t left = t;
    while (left > 0) {
      std::uniform_int_distribution<std::uint64_t> uc(1, left);
      e.count = uc(rng);
      left -= e.count;
      chunks.Accumulate(e);
    }
    bool exact = chunks.steps() == t;
    for (int l = 1; l <= whole.max_lambda(); ++l) {
      const double single = SubsampledGaussianLogMoment(q, sigma, l);
      exact = exact && whole.alpha()[l - 1] == static_cast<double>(t) * single &&
              chunks.alpha()[l - 1] == whole.alpha()[l - 1];
    }
    // Two distinct mechanisms compose to the sum of their ledgers.
    NoiseEvent other;
    other.q = uq(rng);
    other.sigma = us(rng);
    other.count = static_cast<std::uint64_t>(ut(rng));
    LogMomentLedger a, b, both;
    e.count = t;
    a.Accumulate(e);
    b.Accumulate(other);
    both.Accumulate(other);
    both.Accumulate(e);
    for (int l = 0; l < a.max_lambda(); ++l) {
      exact = exact && both.alpha()[l] == a.alpha()[l] + b.alpha()[l];
    }
    c.Expect(exact, "additivity case " + std::to_string(i));

    double s1 = us(rng), s2 = us(rng);
    if (s1 > s2) std::swap(s1, s2);
    auto t1 = static_cast<std::uint64_t>(ut(rng));
    auto t2 = static_cast<std::uint64_t>(ut(rng));
    if (t1 > t2) std::swap(t1, t2);
    c.Expect(EpsilonAfter(q, s1, t1, 1e-5) >= EpsilonAfter(q, s2, t1, 1e-5),
             "epsilon rose with sigma in case " + std::to_string(i));
    c.Expect(EpsilonAfter(q, s1, t1, 1e-5) <= EpsilonAfter(q, s1, t2, 1e-5),
             "epsilon fell with steps in case " + std::to_string(i));
  }
  std::uniform_real_distribution<double> ue(0.5, 8.0);
  std::uniform_int_distribution<int> uT(10, 5000);
  int calibrated = 0;
  for (int i = 0; i < 40; ++i) {
    const double q = uq(rng);
    const auto steps = static_cast<std::uint64_t>(uT(rng));
    const PrivacyBudget budget{ue(rng), 1e-5};
    try {
      const double sigma = SigmaForBudget(q, steps, budget);
      c.Expect(EpsilonAfter(q, sigma, steps, budget.delta0) <= budget.epsilon0,
               "calibration round trip case " + std::to_string(i));
      ++calibrated;
    } catch (const CalibrationError&) {
      // No sigma in the search bracket meets the budget; nothing to check.
    }
  }
  c.Expect(calibrated >= 30, "too few feasible calibration cases");
  c.Note("200 additivity and monotonicity cases, " + std::to_string(calibrated) +
         " calibration round trips");
}

// Sum of squared outputs as a smooth per-example loss.
double SquaredOutput(std::span<const double> out, std::span<double> d_out) {
  double l = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    l += 0.5 * out[i] * out[i];
    d_out[i] = out[i];
  }
  return l;
}

double PenaltyOf(const Network& net, std::span<const double> x, double lambda) {
  const auto g = InputGradient(net, x);
  double n2 = 0.0;
  for (double v : g) n2 += v * v;
  const double d = std::sqrt(n2) - 1.0;
  return lambda * d * d;
}

void GradientCorrectness(Checker& c) {
  using testing::NumericGradient;
  using testing::ParamsOf;
  using testing::RelativeError;
  using testing::WithParams;
  const auto start = std::chrono::steady_clock::now();
  double worst_first = 0.0, worst_penalty = 0.0;
  auto first = [&](double err, const std::string& what) {
    worst_first = std::max(worst_first, err);
    c.Expect(err <= 1e-5, what);
  };
  auto second = [&](double err, const std::string& what) {
    worst_penalty = std::max(worst_penalty, err);
    c.Expect(err <= 1e-4, what);
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::string tag = " seed " + std::to_string(seed);
    std::mt19937_64 rng(seed);

    // Per-example parameter gradients.
    const Network net = Network::Mlp({3, 8, 6, 2}, Activation::kTanh,
                                     Activation::kTanh, rng);
    const Tensor batch = testing::RandomBatch(3, 3, rng);
    const auto grads = PerExampleGradients(net, SquaredOutput, batch);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      const auto loss = [&](std::span<const double> p) {
        double l = 0.0;
        for (double o : WithParams(net, p).Evaluate(batch.row(r))) l += 0.5 * o * o;
        return l;
      };
      first(RelativeError(grads[r], NumericGradient(loss, ParamsOf(net), 1e-6)),
            "per-example" + tag);
    }

    // Input gradient.
    const Network critic = Network::Mlp({4, 16, 16, 1}, Activation::kTanh,
                                        Activation::kIdentity, rng);
    const auto x = testing::RandomVector(4, rng);
    const auto f = [&](std::span<const double> v) { return critic.Evaluate(v)[0]; };
    first(RelativeError(InputGradient(critic, x), NumericGradient(f, x, 1e-6)),
          "input" + tag);

    // Generator gradient through a frozen critic.
    std::mt19937_64 model_rng(seed + 1000);
    const GanModel model = GanModel::Create(2, 2, {8}, {8, 8}, Activation::kTanh,
                                            Activation::kTanh, model_rng);
    const Tensor codes = SampleCodes(4, 2, rng);
    double g_loss = 0.0;
    const auto g_grad = GeneratorGradient(model, codes, &g_loss);
    const auto gf = [&](std::span<const double> p) {
      GanModel m = model;
      m.generator = WithParams(model.generator, p);
      double l = 0.0;
      GeneratorGradient(m, codes, &l);
      return l;
    };
    first(RelativeError(g_grad, NumericGradient(gf, ParamsOf(model.generator), 1e-6)),
          "generator" + tag);

    // Penalty gradient by double backprop.
    const Network pnet = Network::Mlp({2, 12, 12, 1}, Activation::kTanh,
                                      Activation::kIdentity, rng);
    const auto px = testing::RandomVector(2, rng);
    const PenaltyGradient pg = PenaltyParamGradient(pnet, px, 10.0);
    const auto pf = [&](std::span<const double> p) {
      return PenaltyOf(WithParams(pnet, p), px, 10.0);
    };
    second(RelativeError(pg.grad, NumericGradient(pf, ParamsOf(pnet), 1e-5)),
           "penalty" + tag);

    // Full per-example critic loss, penalty included.
    std::mt19937_64 data_rng(seed + 50);
    const Tensor real = testing::RandomBatch(3, 2, data_rng, 0.9);
    std::mt19937_64 wrng(seed);
    const std::mt19937_64 saved = wrng;
    const CriticGradients cg = WganGradients(model, real, 10.0, wrng);
    for (std::size_t i = 0; i < real.rows(); ++i) {
      const auto loss = [&](std::span<const double> p) {
        GanModel m = model;
        m.discriminator = WithParams(model.discriminator, p);
        std::mt19937_64 r = saved;
        return WganGradients(m, real, 10.0, r).losses[i];
      };
      second(RelativeError(cg.grads[i],
                           NumericGradient(loss, ParamsOf(model.discriminator), 1e-5)),
             "critic" + tag);
    }
    c.Expect(net.num_params() <= 1000 && critic.num_params() <= 1000 &&
                 pnet.num_params() <= 1000 &&
                 model.discriminator.num_params() <= 1000,
             "network too large");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.Expect(secs < 60.0, Fmt("took %.1f s", secs));
  c.Note(Fmt("max first-order rel err %.2g, max penalty rel err %.2g",
             worst_first, worst_penalty));
}

void Sanitizer(Checker& c) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ub(0.01, 5.0), us(0.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double bound = ub(rng);
    const auto g = testing::RandomVector(1 + i % 17, rng, us(rng));
    const auto clipped = ClipGroup(g, bound);
    double n2 = 0.0;
    for (double v : clipped) n2 += v * v;
    c.Expect(std::sqrt(n2) <= bound + 1e-9, "clip case " + std::to_string(i));
  }
  std::size_t compared = 0;
  for (const auto& bounds : oracle::ClusterFixtures()) {
    for (std::size_t k = 1; k <= bounds.size(); ++k) {
      const ClippingPlan plan = ClusterWeights(bounds, k);
      const auto ref = oracle::ExhaustiveCluster(bounds, k);
      bool same = plan.groups.size() == ref.size();
      for (std::size_t j = 0; same && j < ref.size(); ++j) {
        same = plan.groups[j].member_ids == ref[j].members &&
               std::abs(plan.groups[j].bound - ref[j].bound) <= 1e-12;
      }
      c.Expect(same, "cluster fixture of size " + std::to_string(bounds.size()) +
                         " k " + std::to_string(k));
      ++compared;
    }
  }
  const std::vector<double> four = {1.0, 1.1, 4.0, 4.2};
  const ClippingPlan trace = ClusterWeights(four, 2);
  c.Expect(trace.groups.size() == 2 &&
               std::abs(trace.groups[0].bound - 1.4866) <= 1e-4 &&
               std::abs(trace.groups[1].bound - 5.8000) <= 1e-4,
           "four-bound trace");
  c.Note(std::to_string(compared) + " cluster cases against exhaustive search");
}

Dataset SmallRing(std::size_t n, std::uint64_t seed) {
  ToySpec spec;
  spec.n = n;
  spec.seed = seed;
  return MakeToy(spec);
}

GanModel SmallModel(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return GanModel::Create(2, 2, {8}, {8, 8}, Activation::kTanh,
                          Activation::kTanh, rng);
}

GanConfig SmallConfig(std::uint64_t seed) {
  GanConfig c;
  c.m = 16;
  c.m_pub = 8;
  c.n_critic = 2;
  c.max_iters = 25;
  c.sigma = 1.0;
  c.budget = {50.0, 1e-5};
  c.seed = seed;
  return c;
}

std::string MetricStream(const std::vector<MetricRecord>& records) {
  std::string s;
  for (const MetricRecord& r : records) s += FormatMetricRecord(r) + "\n";
  return s;
}

void ReductionIdentity(Checker& c) {
  const Dataset data = SmallRing(400, 1);
  for (std::uint64_t seed : {1, 2, 3}) {
    GanModel a = SmallModel(seed), b = SmallModel(seed);
    GanConfig cfg = SmallConfig(seed);
    cfg.t_warm = 0;
    cfg.k = 1;
    cfg.grouping = Grouping::kGlobal;
    cfg.adaptive_clipping = false;
    cfg.noising = NoisingMode::kPerBatch;
    LogMomentLedger la, lb;
    const TrainReport basic = TrainBasic(a, data, cfg, la);
    const TrainReport adv = TrainAdvanced(b, data, nullptr, cfg, lb);
    const std::string tag = " seed " + std::to_string(seed);
    c.Expect(!basic.metrics.empty(), "empty metric stream" + tag);
    c.Expect(MetricStream(basic.metrics) == MetricStream(adv.metrics),
             "metric streams differ" + tag);
    c.Expect(a == b, "final models differ" + tag);
    c.Expect(la.Export() == lb.Export(), "ledgers differ" + tag);
  }
}

void BudgetStop(Checker& c) {
  const Dataset data = SmallRing(400, 2);
  struct Case {
    double epsilon0;
    double sigma;
  };
  for (const Case& k : {Case{0.5, 2.0}, Case{4.0, 1.0}}) {
    GanModel model = SmallModel(11);
    GanConfig cfg = SmallConfig(11);
    cfg.m = 8;
    cfg.sigma = k.sigma;
    cfg.max_iters = 5000;
    cfg.budget = {k.epsilon0, 1e-5};
    LogMomentLedger ledger;
    const TrainReport r = TrainBasic(model, data, cfg, ledger);
    const std::string tag = Fmt(" (eps0 %g sigma %g)", k.epsilon0, k.sigma);
    c.Expect(r.stop_reason == StopReason::kBudgetExhausted, "no budget stop" + tag);
    const auto& m = r.metrics;
    if (m.size() < 2) {
      c.Expect(false, "fewer than two records" + tag);
      continue;
    }
    c.Expect(m.back().delta > cfg.budget.delta0, "last record within budget" + tag);
    bool prior_ok = true;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      prior_ok = prior_ok && m[i].delta <= cfg.budget.delta0;
    }
    c.Expect(prior_ok, "an earlier record already violated" + tag);
    c.Expect(m[m.size() - 2].epsilon <= k.epsilon0, "prior epsilon above eps0" + tag);
    // Replay with a fresh ledger: the stop falls on the first violating
    // generator step.
    const double q = static_cast<double>(cfg.m) / static_cast<double>(data.n());
    const auto delta_after = [&](std::uint64_t iters) {
      LogMomentLedger replay;
      NoiseEvent e;
      e.q = q;
      e.sigma = cfg.sigma;
      e.count = iters * cfg.n_critic;
      replay.Accumulate(e);
      return replay.DeltaForEpsilon(k.epsilon0);
    };
    c.Expect(ledger.steps() == m.size() * cfg.n_critic, "ledger step count" + tag);
    c.Expect(delta_after(m.size()) > cfg.budget.delta0 &&
                 delta_after(m.size() - 1) <= cfg.budget.delta0,
             "stop is not at the first violation" + tag);
    c.Note(Fmt("eps0 %g stopped after %g iterations", k.epsilon0,
               static_cast<double>(m.size())));
  }
}

ExperimentConfig RingRun(const std::string& out, std::uint64_t seed) {
  ExperimentConfig c;
  c.out_dir = out;
  c.seed = seed;
  c.data.toy.n = 8000;
  c.eval.inception = false;
  return c;
}

void DeskEndToEnd(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream log;
  int covered = 0;
  std::string coverages;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig cfg = RingRun(FreshDir("np" + std::to_string(seed)), seed);
    cfg.mode = RunMode::kNonPrivate;
    cfg.gan.max_iters = 2000;
    cfg.eval.js = false;
    const RunOutcome o = RunExperiment(cfg, log);
    const double cov = ScoreValue(o.artifacts.scores, "mode_coverage");
    coverages += (coverages.empty() ? "" : ",") + Fmt("%g", cov * 8);
    if (cov >= 7.0 / 8.0) ++covered;
  }
  c.Expect(covered >= 4, "non-private coverage below 7/8 on too many seeds");
  c.Note("non-private modes covered per seed " + coverages);

  int dp_ok = 0;
  std::string dp_notes;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ExperimentConfig cfg = RingRun(FreshDir("dp" + std::to_string(seed)), seed);
    cfg.mode = RunMode::kAdvanced;
    cfg.gan.m = 16;
    cfg.gan.t_warm = 1000;
    cfg.gan.sigma = 0.5;
    cfg.gan.accounting = AccountingMode::kSound;
    cfg.gan.budget = {10.0, 1e-5};
    cfg.gan.max_iters = 100000;
    const RunOutcome o = RunExperiment(cfg, log);
    const double cov = ScoreValue(o.artifacts.scores, "mode_coverage");
    const double js = ScoreValue(o.artifacts.scores, "js_mean");

    // Control: the same initial generator, never trained.
    ExperimentConfig ctl = cfg;
    ctl.out_dir = FreshDir("ctl" + std::to_string(seed));
    ctl.mode = RunMode::kNonPrivate;
    ctl.gan.max_iters = 0;
    const RunOutcome co = RunExperiment(ctl, log);
    const double js_ctl = ScoreValue(co.artifacts.scores, "js_mean");
    const bool ok = o.stop_reason == StopReason::kBudgetExhausted &&
                    cov >= 5.0 / 8.0 && js < js_ctl;
    if (ok) ++dp_ok;
    dp_notes += Fmt(" seed %g: %g modes", static_cast<double>(seed), cov * 8) +
                Fmt(" js %.4f vs control %.4f", js, js_ctl) + ";";
  }
  c.Expect(dp_ok >= 2, "private run fails on the seed majority");
  c.Note("private" + dp_notes.substr(0, dp_notes.size() - 1));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.Expect(secs < 600.0, Fmt("took %.0f s", secs));
}

void MetricOracles(Checker& c) {
  using Table = std::vector<std::vector<double>>;
  const Table t = {{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.2, 0.2, 0.6}, {0.5, 0.25, 0.25}};
  const double kl =
      (0.7 * std::log(0.7 / 0.375) + 0.2 * std::log(0.2 / 0.3625) +
       0.1 * std::log(0.1 / 0.2625)) +
      (0.1 * std::log(0.1 / 0.375) + 0.8 * std::log(0.8 / 0.3625) +
       0.1 * std::log(0.1 / 0.2625)) +
      (0.2 * std::log(0.2 / 0.375) + 0.2 * std::log(0.2 / 0.3625) +
       0.6 * std::log(0.6 / 0.2625)) +
      (0.5 * std::log(0.5 / 0.375) + 0.25 * std::log(0.25 / 0.3625) +
       0.25 * std::log(0.25 / 0.2625));
  c.Expect(std::abs(InceptionScoreOfTable(t) - std::exp(kl / 4.0)) <= 1e-9,
           "four-row table A");
  const Table sharp = {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.9, 0.1}};
  // p(y) = (0.6, 0.4).
  const double kl2 = std::log(1.0 / 0.6) + std::log(1.0 / 0.4) +
                     (0.5 * std::log(0.5 / 0.6) + 0.5 * std::log(0.5 / 0.4)) +
                     (0.9 * std::log(0.9 / 0.6) + 0.1 * std::log(0.1 / 0.4));
  c.Expect(std::abs(InceptionScoreOfTable(sharp) - std::exp(kl2 / 4.0)) <= 1e-9,
           "four-row table B");
  const Table uniform(100, std::vector<double>(10, 0.1));
  c.Expect(std::abs(InceptionStyleScore(uniform).mean - 1.0) <= 1e-9,
           "uniform classifier");
  Table onehot;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> r(10, 0.0);
    r[i % 10] = 1.0;
    onehot.push_back(r);
  }
  c.Expect(std::abs(InceptionStyleScore(onehot).mean - 10.0) <= 1e-9,
           "one-hot balanced");
  const double js = 0.5 * (0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5)) +
                    0.5 * (0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1));
  c.Expect(std::abs(JsPointScore(0.9) - js) <= 1e-9, "Bernoulli fixture");
  c.Expect(JsPointScore(0.5) == 0.0, "fair coin");
  c.Note(Fmt("Bernoulli(0.9) score %.6f", JsPointScore(0.9)));
}

void SemiReduction(Checker& c) {
  ToySpec spec;
  spec.n = 160;
  spec.seed = 4;
  const Dataset labeled = MakeToy(spec);
  const GanModel model = SmallModel(4);
  SemiConfig cfg;
  cfg.p_s_final = 0.0;
  cfg.total_iters = 80;
  cfg.m = 16;
  for (std::uint64_t seed : {1, 2, 3}) {
    const SemiResult semi = TrainSemiSupervised(model.generator, 2, labeled, cfg, seed);
    const SemiResult plain = TrainSupervised(labeled, cfg, seed);
    const std::string tag = " seed " + std::to_string(seed);
    c.Expect(semi.c1_losses == plain.c1_losses, "C1 losses differ" + tag);
    c.Expect(semi.c1.network == plain.c1.network, "C1 weights differ" + tag);
    bool real_only = true;
    for (const auto& [syn, real] : semi.c1_counts) real_only = real_only && syn == 0;
    c.Expect(real_only, "synthetic rows drawn" + tag);
  }
  for (double p : {0.1, 0.3, 0.5}) {
    for (std::size_t total : {30, 90, 301}) {
      SemiConfig r;
      r.p_s_final = p;
      r.total_iters = total;
      r.m = 10;
      double prev = 0.0;
      bool ok = true;
      const auto ramp_start =
          static_cast<double>(total) * r.ramp_start_fraction;
      for (std::size_t t = 1; t <= total; ++t) {
        const double f = SyntheticFraction(r, t);
        ok = ok && f >= prev && f >= 0.0 && f <= p;
        if (static_cast<double>(t) <= ramp_start) ok = ok && f == 0.0;
        prev = f;
      }
      ok = ok && SyntheticFraction(r, total) == p;
      c.Expect(ok, Fmt("ramp p %g total %g", p, static_cast<double>(total)));
    }
  }
  SemiConfig counts;
  counts.p_s_final = 0.5;
  counts.total_iters = 30;
  counts.m = 10;
  const SemiResult r = TrainSemiSupervised(model.generator, 2, labeled, counts, 5);
  bool ok = r.c1_counts.size() == 30;
  for (std::size_t t = 1; ok && t <= 30; ++t) {
    const auto syn = static_cast<std::size_t>(
        std::floor(10.0 * SyntheticFraction(counts, t)));
    ok = r.c1_counts[t - 1].first == syn &&
         r.c1_counts[t - 1].first + r.c1_counts[t - 1].second == 10;
  }
  c.Expect(ok, "batch composition does not follow the ramp");
}

int RunCli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + DPGAN_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void Determinism(Checker& c) {
  const std::string common =
      "--set data.n=600 --set model.g_hidden=16 --set model.d_hidden=16 "
      "--set gan.m=16 --set gan.max_iters=30 --set eval.samples=300 "
      "--set eval.inception=false ";
  const std::vector<std::string> runs = {
      "--mode nonprivate --seed 3",
      "--mode basic --seed 4 --sigma 1.2",
      "--mode advanced --seed 5 --warm-iters 5 --grouping clustered --groups 3 "
      "--set dp.adaptive=true",
      "--mode advanced --seed 6 --noising per_example --set gan.n_critic=2"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string a = FreshDir("det_a" + std::to_string(i));
    const std::string b = FreshDir("det_b" + std::to_string(i));
    const int ra = RunCli(common + runs[i] + " --out " + a);
    const int rb = RunCli(common + runs[i] + " --out " + b);
    c.Expect(ra == 0 && rb == 0, "CLI failed for: " + runs[i]);
    for (const char* file : {"metrics.tsv", "generator.ckpt", "discriminator.ckpt"}) {
      const std::string fa = ReadAll(a + "/" + file);
      c.Expect(!fa.empty() && fa == ReadAll(b + "/" + file),
               std::string(file) + " differs for: " + runs[i]);
    }
    if (runs[i].find("nonprivate") == std::string::npos) {
      c.Expect(ReadAll(a + "/ledger.txt") == ReadAll(b + "/ledger.txt"),
               "ledger differs for: " + runs[i]);
    }
  }
  c.Note(std::to_string(runs.size()) + " CLI configurations run twice");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Checker&)> run;
};

}  // namespace
}  // namespace dpgan

int main() {
  using namespace dpgan;
  const std::vector<Criterion> criteria = {
      {1, "accountant closed form",
       [](Checker& c) { AccountantClosedForm(c, 1.0); }},
      {2, "accountant against Simpson oracle", AccountantOracle},
      {3, "small-sampling bound envelope", BoundEnvelope},
      {4, "composition and queries", CompositionAndQueries},
      {5, "gradient correctness", GradientCorrectness},
      {6, "sanitizer clipping and clustering", Sanitizer},
      {7, "advanced-to-basic reduction", ReductionIdentity},
      {8, "budget stop", BudgetStop},
      {9, "desk-scale end to end", DeskEndToEnd},
      {10, "metric oracles", MetricOracles},
      {11, "semi-supervised reduction", SemiReduction},
      {12, "CLI determinism", Determinism},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!c.ok()) ++failed;
    std::printf("criterion %2d: %s  %s (%s; %.1f s)\n", cr.id,
                c.ok() ? "PASS" : "FAIL", cr.name, c.Summary().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
