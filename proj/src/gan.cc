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

#include "dpgan/gan.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpgan/errors.h"

namespace dpgan {

const char* GroupingName(Grouping g) {
  switch (g) {
    case Grouping::kGlobal:
      return "global";
    case Grouping::kWeightBias:
      return "weight_bias";
    case Grouping::kClustered:
      return "clustered";
  }
  return "unknown";
}

Grouping ParseGrouping(const std::string& name) {
  if (name == "global") return Grouping::kGlobal;
  if (name == "weight_bias") return Grouping::kWeightBias;
  if (name == "clustered") return Grouping::kClustered;
  throw ContractError("unknown grouping '" + name + "'");
}

const char* StopReasonName(StopReason r) {
  switch (r) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kBudgetExhausted:
      return "budget_exhausted";
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kDiverged:
      return "diverged";
  }
  return "unknown";
}

void GanConfig::Validate() const {
  if (!(lambda_gp >= 0.0)) throw ConfigError("gan.lambda_gp", "must be >= 0");
  if (n_critic < 1) throw ConfigError("gan.n_critic", "must be >= 1");
  if (m < 1) throw ConfigError("gan.m", "must be >= 1");
  if (m_pub < 1) throw ConfigError("gan.m_pub", "must be >= 1");
  if (k < 1) throw ConfigError("dp.groups", "must be >= 1");
  if (refresh_stride < 1) throw ConfigError("dp.refresh_stride", "must be >= 1");
  if (!(clip_c > 0.0)) throw ConfigError("dp.clip", "must be > 0");
  if (!(clip_bias > 0.0)) throw ConfigError("dp.clip_bias", "must be > 0");
  if (!(sigma >= 0.0)) throw ConfigError("dp.sigma", "must be >= 0");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("adam.alpha", "must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) {
    throw ConfigError("adam.beta1", "must lie in [0, 1)");
  }
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("adam.beta2", "must lie in [0, 1)");
  }
  if (!(budget.epsilon0 > 0.0)) throw ConfigError("dp.epsilon", "must be > 0");
  if (!(budget.delta0 > 0.0 && budget.delta0 < 1.0)) {
    throw ConfigError("dp.delta", "must lie in (0, 1)");
  }
  if (grouping == Grouping::kClustered && !adaptive_clipping) {
    throw ConfigError("dp.grouping",
                      "clustered grouping needs adaptive clipping bounds");
  }
  if (grouping == Grouping::kGlobal && k != 1) {
    throw ConfigError("dp.groups", "global grouping uses exactly one group");
  }
  if (grouping == Grouping::kWeightBias && k != 2) {
    throw ConfigError("dp.groups", "weight/bias grouping uses exactly two groups");
  }
}

GanModel GanModel::Create(std::size_t latent_dim, std::size_t data_dim,
                          const std::vector<std::size_t>& g_hidden,
                          const std::vector<std::size_t>& d_hidden,
                          Activation g_activation, Activation d_activation,
                          std::mt19937_64& rng) {
  std::vector<std::size_t> g_sizes = {latent_dim};
  g_sizes.insert(g_sizes.end(), g_hidden.begin(), g_hidden.end());
  g_sizes.push_back(data_dim);
  std::vector<std::size_t> d_sizes = {data_dim};
  d_sizes.insert(d_sizes.end(), d_hidden.begin(), d_hidden.end());
  d_sizes.push_back(1);
  GanModel model;
  model.latent_dim = latent_dim;
  model.generator = Network::Mlp(g_sizes, g_activation, Activation::kTanh, rng);
  model.discriminator =
      Network::Mlp(d_sizes, d_activation, Activation::kIdentity, rng);
  return model;
}

void GanModel::Validate() const {
  if (generator.input_size() != latent_dim) {
    throw DimensionError("generator input differs from latent_dim");
  }
  if (generator.output_size() != discriminator.input_size()) {
    throw DimensionError("generator output does not match discriminator input");
  }
  if (discriminator.output_size() != 1) {
    throw DimensionError("discriminator must have a scalar output");
  }
}

Tensor SampleCodes(std::size_t n, std::size_t latent_dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor codes = Tensor::Zeros(n, latent_dim);
  for (double& v : codes.values()) v = normal(rng);
  return codes;
}

Tensor Generate(const GanModel& model, std::size_t n, std::mt19937_64& rng) {
  if (n < 1) throw ContractError("sample count must be at least 1");
  return Forward(model.generator, SampleCodes(n, model.latent_dim, rng));
}

CriticGradients WganGradients(const GanModel& model, const Tensor& real_batch,
                              double lambda_gp, std::mt19937_64& rng,
                              double divergence_norm) {
  const std::size_t m = real_batch.rows();
  if (m == 0) throw ContractError("critic batch is empty");
  const Network& d = model.discriminator;
  const std::size_t dim = d.input_size();
  if (real_batch.cols() != dim) {
    throw DimensionError("real batch width does not match the discriminator");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CriticGradients out;
  out.grads.reserve(m);
  out.losses.reserve(m);
  std::vector<double> code(model.latent_dim);
  std::vector<double> x_hat(dim);
  const double plus = 1.0;
  const double minus = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (double& v : code) v = normal(rng);
    const double rho = unit(rng);
    const std::vector<double> fake = model.generator.Evaluate(code);
    const auto real = real_batch.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      x_hat[j] = rho * real[j] + (1.0 - rho) * fake[j];
    }
    const ForwardTrace fake_trace = d.Trace(fake);
    const ForwardTrace real_trace = d.Trace(real);
    PenaltyGradient pen = PenaltyParamGradient(d, x_hat, lambda_gp);
    std::vector<double>& g = pen.grad;
    d.Backward(fake_trace, std::span<const double>(&plus, 1), g, {});
    d.Backward(real_trace, std::span<const double>(&minus, 1), g, {});
    const double loss =
        fake_trace.output()[0] - real_trace.output()[0] + pen.penalty;
    double sq = 0.0;
    for (double v : g) sq += v * v;
    if (!std::isfinite(loss) || !std::isfinite(sq)) {
      throw DivergenceError("non-finite critic loss at example " + std::to_string(i),
                            static_cast<long>(i));
    }
    if (std::sqrt(sq) > divergence_norm) {
      throw DivergenceError(
          "critic gradient norm exploded at example " + std::to_string(i),
          static_cast<long>(i));
    }
    out.losses.push_back(loss);
    out.grads.push_back(std::move(g));
  }
  return out;
}

std::vector<double> GeneratorGradient(const GanModel& model, const Tensor& codes,
                                      double* loss) {
  const std::size_t m = codes.rows();
  if (m == 0) throw ContractError("generator batch is empty");
  const Network& g = model.generator;
  std::vector<double> grad(g.num_params(), 0.0);
  double total = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ForwardTrace trace = g.Trace(codes.row(i));
    const std::vector<double> fake(trace.output().begin(), trace.output().end());
    total -= model.discriminator.Evaluate(fake)[0];
    std::vector<double> upstream = InputGradient(model.discriminator, fake);
    for (double& v : upstream) v *= -inv_m;
    g.Backward(trace, upstream, grad, {});
  }
  if (loss != nullptr) *loss = total * inv_m;
  return grad;
}

double GeneratorStep(GanModel& model, std::size_t m, std::mt19937_64& rng,
                     AdamState& adam) {
  const Tensor codes = SampleCodes(m, model.latent_dim, rng);
  double loss = 0.0;
  const std::vector<double> grad = GeneratorGradient(model, codes, &loss);
  if (!std::isfinite(loss)) throw DivergenceError("non-finite generator loss");
  adam.Step(grad, model.generator.params());
  return loss;
}

namespace {

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> MeanGradient(const std::vector<std::vector<double>>& grads) {
  std::vector<double> mean(grads.front().size(), 0.0);
  for (const auto& g : grads) {
    for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i];
  }
  for (double& v : mean) v /= static_cast<double>(grads.size());
  return mean;
}

// Plain improved-WGAN iterations, shared by the baseline and warm start.
// Records are appended as they happen so a divergence keeps the earlier ones.
void RunNonPrivate(GanModel& model, const Dataset& data, std::size_t iters,
                   const GanConfig& config, const char* phase,
                   std::mt19937_64& rng, std::vector<MetricRecord>& metrics,
                   std::size_t* critic_steps) {
  model.Validate();
  AdamState d_adam(model.discriminator.num_params(), config.adam);
  AdamState g_adam(model.generator.num_params(), config.adam);
  const std::size_t m = std::min(config.m, data.n());
  for (std::size_t it = 1; it <= iters; ++it) {
    double d_loss = 0.0;
    for (std::size_t t = 0; t < config.n_critic; ++t) {
      const Batch batch = SampleBatch(data, m, rng);
      const CriticGradients cg = WganGradients(model, batch.points, config.lambda_gp,
                                               rng, config.divergence_norm);
      d_adam.Step(MeanGradient(cg.grads), model.discriminator.params());
      d_loss = Mean(cg.losses);
      if (critic_steps != nullptr) ++*critic_steps;
    }
    const double g_loss = GeneratorStep(model, config.m, rng, g_adam);
    metrics.push_back({it, phase, d_loss, g_loss, 0.0, 0.0, "-"});
  }
}

enum class PrivateVariant { kBasic, kAdvanced };

TrainReport RunPrivate(GanModel& model, const Dataset& private_data,
                       const Dataset* public_data, const GanConfig& config,
                       LogMomentLedger& ledger, const CriticObserver& observer,
                       PrivateVariant variant) {
  config.Validate();
  model.Validate();
  const bool advanced = variant == PrivateVariant::kAdvanced;
  const bool adaptive = advanced && config.adaptive_clipping;
  if (advanced && (config.t_warm > 0 || adaptive) && public_data == nullptr) {
    throw ConfigError("data.public_fraction",
                      "warm start and adaptive clipping need public data");
  }
  if (ledger.DeltaForEpsilon(config.budget.epsilon0) > config.budget.delta0) {
    throw BudgetExhaustedError("privacy budget already exhausted");
  }
  if (config.m > private_data.n()) {
    throw ConfigError("gan.m", "batch size exceeds the private data size");
  }

  TrainReport report;
  std::mt19937_64 rng(config.seed);
  try {
    if (advanced && config.t_warm > 0) {
      report.warm_metrics =
          WarmStart(model, *public_data, config.t_warm, config, rng);
    }

    Network& d = model.discriminator;
    AdamState d_adam(d.num_params(), config.adam);
    AdamState g_adam(model.generator.num_params(), config.adam);

    ClippingPlan plan;
    if (!advanced || config.grouping == Grouping::kGlobal) {
      plan = GlobalPlan(d.num_params(), config.clip_c);
    } else if (config.grouping == Grouping::kWeightBias) {
      plan = WeightBiasPlan(d, config.clip_c, config.clip_bias);
    }
    const std::size_t m_pub =
        public_data != nullptr ? std::min(config.m_pub, public_data->n()) : 0;

    for (std::size_t it = 1; it <= config.max_iters; ++it) {
      double d_loss = 0.0;
      for (std::size_t t = 0; t < config.n_critic; ++t) {
        if (adaptive && report.critic_steps % config.refresh_stride == 0) {
          const Batch pub = SampleBatch(*public_data, m_pub, rng);
          const CriticGradients pg = WganGradients(
              model, pub.points, config.lambda_gp, rng, config.divergence_norm);
          if (config.grouping == Grouping::kClustered) {
            AdaptiveBounds est = EstimateParameterBounds(pg.grads);
            plan = ClusterWeights(est.bounds, config.k);
            RebindToMemberMeans(plan, est.bounds);
            plan.notices = std::move(est.notices);
          } else {
            if (config.grouping == Grouping::kWeightBias) {
              plan = WeightBiasPlan(d, 1.0, 1.0);
            } else {
              plan = GlobalPlan(d.num_params(), 1.0);
            }
            AdaptiveBounds est = EstimateBounds(pg.grads, plan);
            for (std::size_t j = 0; j < plan.groups.size(); ++j) {
              plan.groups[j].bound = est.bounds[j];
              plan.groups[j].merged_bound = est.bounds[j];
            }
            plan.notices.insert(plan.notices.end(), est.notices.begin(),
                                est.notices.end());
          }
        }
        const Batch batch = SampleBatch(private_data, config.m, rng);
        const CriticGradients cg = WganGradients(
            model, batch.points, config.lambda_gp, rng, config.divergence_norm);
        const std::vector<double> noisy =
            Sanitize(cg.grads, plan, config.sigma, rng, config.noising);
        if (observer) observer({it, plan, cg.grads, noisy});
        // One Adam state sliced per group is the same as per-group Adam.
        d_adam.Step(noisy, d.params());
        NoiseEvent event;
        event.sigma = config.sigma;
        event.q = batch.q;
        event.count = 1;
        event.groups = plan.groups.size();
        event.mode = config.accounting;
        event.n_param = d.num_params();
        ledger.Accumulate(event);
        ++report.critic_steps;
        d_loss = Mean(cg.losses);
      }
      const double g_loss = GeneratorStep(model, config.m, rng, g_adam);
      const double delta = ledger.DeltaForEpsilon(config.budget.epsilon0);
      const double epsilon = ledger.EpsilonForDelta(config.budget.delta0);
      report.metrics.push_back(
          {it, "dp", d_loss, g_loss, epsilon, delta, plan.Digest()});
      report.iterations_run = it;
      if (delta > config.budget.delta0) {
        report.stop_reason = StopReason::kBudgetExhausted;
        break;
      }
    }
    if (report.stop_reason != StopReason::kBudgetExhausted) {
      report.stop_reason = StopReason::kMaxIters;
    }
    for (const std::string& n : plan.notices) report.notices.push_back(n);
  } catch (const DivergenceError& e) {
    report.stop_reason = StopReason::kDiverged;
    report.divergence_message = e.what();
  }
  report.epsilon_consumed = ledger.EpsilonForDelta(config.budget.delta0);
  report.delta_at_budget_epsilon = ledger.DeltaForEpsilon(config.budget.epsilon0);
  return report;
}

}  // namespace

std::vector<MetricRecord> WarmStart(GanModel& model, const Dataset& public_data,
                                    std::size_t iters, const GanConfig& config,
                                    std::mt19937_64& rng) {
  std::vector<MetricRecord> metrics;
  RunNonPrivate(model, public_data, iters, config, "warm", rng, metrics, nullptr);
  return metrics;
}

TrainReport TrainNonPrivate(GanModel& model, const Dataset& data,
                            const GanConfig& config) {
  TrainReport report;
  std::mt19937_64 rng(config.seed);
  try {
    RunNonPrivate(model, data, config.max_iters, config, "nonprivate", rng,
                  report.metrics, &report.critic_steps);
    report.stop_reason = StopReason::kMaxIters;
  } catch (const DivergenceError& e) {
    report.stop_reason = StopReason::kDiverged;
    report.divergence_message = e.what();
  }
  report.iterations_run = report.metrics.size();
  return report;
}

TrainReport TrainBasic(GanModel& model, const Dataset& private_data,
                       const GanConfig& config, LogMomentLedger& ledger,
                       const CriticObserver& observer) {
  return RunPrivate(model, private_data, nullptr, config, ledger, observer,
                    PrivateVariant::kBasic);
}

TrainReport TrainAdvanced(GanModel& model, const Dataset& private_data,
                          const Dataset* public_data, const GanConfig& config,
                          LogMomentLedger& ledger,
                          const CriticObserver& observer) {
  return RunPrivate(model, private_data, public_data, config, ledger, observer,
                    PrivateVariant::kAdvanced);
}

}  // namespace dpgan
