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

// Improved-WGAN training: the non-private baseline, the basic private
// trainer (global clipping) and the advanced one (warm start, adaptive
// bounds, parameter grouping).

#ifndef DPGAN_GAN_H_
#define DPGAN_GAN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dpgan/accountant.h"
#include "dpgan/adam.h"
#include "dpgan/datasets.h"
#include "dpgan/network.h"
#include "dpgan/sanitizer.h"

namespace dpgan {

// How the advanced trainer partitions discriminator parameters.
enum class Grouping : std::uint8_t { kGlobal, kWeightBias, kClustered };

const char* GroupingName(Grouping g);
Grouping ParseGrouping(const std::string& name);

struct GanConfig {
  double lambda_gp = 10.0;
  std::size_t n_critic = 4;
  std::size_t m = 64;
  std::size_t m_pub = 64;
  AdamHyper adam;
  double clip_c = 1.0;
  // Bias-group bound for non-adaptive weight/bias separation.
  double clip_bias = 1.0;
  double sigma = 1.086;
  PrivacyBudget budget{4.0, 1e-5};
  std::size_t k = 1;
  std::size_t t_warm = 0;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  NoisingMode noising = NoisingMode::kPerBatch;
  AccountingMode accounting = AccountingMode::kSound;
  Grouping grouping = Grouping::kGlobal;
  bool adaptive_clipping = false;
  // Re-estimate adaptive bounds every `refresh_stride` critic steps.
  std::size_t refresh_stride = 1;
  // Per-example gradient l2 norm above which a step counts as diverged.
  double divergence_norm = 1e6;

  // Throws ConfigError naming the bad field.
  void Validate() const;
};

struct GanModel {
  Network generator;      // latent_dim -> data_dim, tanh output
  Network discriminator;  // data_dim -> 1, identity output
  std::size_t latent_dim = 0;

  static GanModel Create(std::size_t latent_dim, std::size_t data_dim,
                         const std::vector<std::size_t>& g_hidden,
                         const std::vector<std::size_t>& d_hidden,
                         Activation g_activation, Activation d_activation,
                         std::mt19937_64& rng);
  // Throws DimensionError if G's output does not feed D.
  void Validate() const;

  friend bool operator==(const GanModel&, const GanModel&) = default;
};

enum class StopReason : std::uint8_t {
  kConverged,
  kBudgetExhausted,
  kMaxIters,
  kDiverged,
};

const char* StopReasonName(StopReason r);

struct MetricRecord {
  std::uint64_t iter = 0;
  std::string phase;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string bounds_digest = "-";

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct TrainReport {
  std::size_t iterations_run = 0;
  std::size_t critic_steps = 0;
  double epsilon_consumed = 0.0;
  double delta_at_budget_epsilon = 0.0;
  StopReason stop_reason = StopReason::kMaxIters;
  std::vector<MetricRecord> metrics;
  // Non-private warm-start iterations run before the private phase.
  std::vector<MetricRecord> warm_metrics;
  std::string divergence_message;
  std::vector<std::string> notices;
};

struct CriticGradients {
  std::vector<std::vector<double>> grads;  // one per example, D-param layout
  std::vector<double> losses;
};

// Per-example critic gradients. For row i: z ~ N(0, I), rho ~ U[0, 1],
// x_hat = rho x_i + (1 - rho) G(z), and
//   loss_i = D(G(z)) - D(x_i) + lambda (||grad_x D(x_hat)|| - 1)^2.
// Throws DivergenceError on a non-finite loss or a gradient norm above
// `divergence_norm`.
CriticGradients WganGradients(const GanModel& model, const Tensor& real_batch,
                              double lambda_gp, std::mt19937_64& rng,
                              double divergence_norm = 1e6);

// Gradient of mean(-D(G(z))) over the given codes with respect to G's
// parameters; returns the loss through `loss`.
std::vector<double> GeneratorGradient(const GanModel& model,
                                      const Tensor& codes, double* loss);

// Draws m codes, takes one Adam step on G and returns the generator loss.
double GeneratorStep(GanModel& model, std::size_t m, std::mt19937_64& rng,
                     AdamState& adam);

// n samples G(z), z ~ N(0, I).
Tensor Generate(const GanModel& model, std::size_t n, std::mt19937_64& rng);
Tensor SampleCodes(std::size_t n, std::size_t latent_dim, std::mt19937_64& rng);

// Observation hook for tests and logging; called after each private critic
// step with the plan used, raw per-example gradients and the sanitized mean.
struct CriticStepView {
  std::size_t iteration;
  const ClippingPlan& plan;
  const std::vector<std::vector<double>>& raw;
  const std::vector<double>& sanitized;
};
using CriticObserver = std::function<void(const CriticStepView&)>;

TrainReport TrainNonPrivate(GanModel& model, const Dataset& data,
                            const GanConfig& config);

// Non-private improved-WGAN iterations on public data. Never touches a
// ledger. Metric records use phase "warm".
std::vector<MetricRecord> WarmStart(GanModel& model, const Dataset& public_data,
                                    std::size_t iters, const GanConfig& config,
                                    std::mt19937_64& rng);

// Basic private training: global clipping at clip_c, one ledger event per
// critic step, stop once delta at epsilon0 exceeds delta0. Throws
// BudgetExhaustedError if the ledger is already over budget.
TrainReport TrainBasic(GanModel& model, const Dataset& private_data,
                       const GanConfig& config, LogMomentLedger& ledger,
                       const CriticObserver& observer = {});

// Advanced private training: warm start, adaptive bounds from public
// batches, grouped clipping. With t_warm = 0, k = 1, adaptive off and
// global grouping it reproduces TrainBasic exactly. Throws ConfigError if
// public data is needed but missing.
TrainReport TrainAdvanced(GanModel& model, const Dataset& private_data,
                          const Dataset* public_data, const GanConfig& config,
                          LogMomentLedger& ledger,
                          const CriticObserver& observer = {});

}  // namespace dpgan

#endif  // DPGAN_GAN_H_
