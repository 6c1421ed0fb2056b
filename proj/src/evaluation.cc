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

#include "dpgan/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dpgan/errors.h"
#include "dpgan/gan.h"

namespace dpgan {
namespace {

std::vector<std::size_t> LayerSizes(std::size_t in,
                                    const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

MeanStderr Summarize(std::span<const double> xs) {
  MeanStderr r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return r;
}

// Targets are probability rows; one-hot for hard labels. Returns the mean
// cross-entropy and adds its parameter gradient into `grad`.
double CrossEntropyStep(const Network& net, const Tensor& inputs,
                        const std::vector<std::vector<double>>& targets,
                        std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t m = inputs.rows();
  const double scale = 1.0 / static_cast<double>(m);
  double loss = 0.0;
  std::vector<double> d_out(net.output_size());
  for (std::size_t i = 0; i < m; ++i) {
    const ForwardTrace trace = net.Trace(inputs.row(i));
    const std::vector<double> p = Softmax(trace.output());
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (targets[i][c] > 0.0) {
        loss -= targets[i][c] * std::log(std::max(p[c], kProbabilityFloor));
      }
      d_out[c] = (p[c] - targets[i][c]) * scale;
    }
    net.Backward(trace, d_out, grad, {});
  }
  loss *= scale;
  if (!std::isfinite(loss)) throw DivergenceError("classifier loss is not finite");
  return loss;
}

std::vector<double> OneHot(int label, int num_classes) {
  std::vector<double> v(static_cast<std::size_t>(num_classes), 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

int Argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

ProbClassifier NewClassifier(std::size_t in, int num_classes,
                             const std::vector<std::size_t>& hidden,
                             Activation act, std::mt19937_64& rng) {
  ProbClassifier clf;
  clf.num_classes = num_classes;
  clf.network = Network::Mlp(
      LayerSizes(in, hidden, static_cast<std::size_t>(num_classes)), act,
      Activation::kIdentity, rng);
  return clf;
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> ProbClassifier::Probabilities(
    std::span<const double> x) const {
  return Softmax(network.Evaluate(x));
}

std::vector<std::vector<double>> ProbClassifier::Probabilities(
    const Tensor& batch) const {
  std::vector<std::vector<double>> rows;
  rows.reserve(batch.rows());
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    rows.push_back(Probabilities(batch.row(i)));
  }
  return rows;
}

int ProbClassifier::Predict(std::span<const double> x) const {
  return Argmax(network.Evaluate(x));
}

ProbClassifier TrainClassifier(const Dataset& train, const Dataset* validation,
                               const ClassifierConfig& config,
                               std::uint64_t seed) {
  if (!train.has_labels() || train.num_classes() < 2) {
    throw ContractError("classifier training needs a labeled dataset");
  }
  std::mt19937_64 rng(seed);
  ProbClassifier clf = NewClassifier(train.d(), train.num_classes(),
                                     config.hidden, config.activation, rng);
  AdamState adam(clf.network.num_params(), config.adam);
  std::vector<double> grad(clf.network.num_params());
  const std::size_t m = std::min(config.m, train.n());
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    const Batch batch = SampleBatch(train, m, rng);
    std::vector<std::vector<double>> targets;
    targets.reserve(m);
    for (int y : batch.labels) targets.push_back(OneHot(y, clf.num_classes));
    CrossEntropyStep(clf.network, batch.points, targets, grad);
    adam.Step(grad, clf.network.params());
    if (validation != nullptr && config.target_accuracy > 0.0 &&
        it % 100 == 0 && Accuracy(clf, *validation) >= config.target_accuracy) {
      break;
    }
  }
  return clf;
}

double Accuracy(const ProbClassifier& clf, const Dataset& data) {
  if (!data.has_labels()) throw ContractError("accuracy needs labels");
  const Tensor& x = data.points();
  const std::vector<int>& y = data.labels();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (clf.Predict(x.row(i)) == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("KL over unequal supports");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * (std::log(std::max(p[i], kProbabilityFloor)) -
                  std::log(std::max(q[i], kProbabilityFloor)));
  }
  return kl;
}

double InceptionScoreOfTable(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ContractError("score of an empty table");
  const std::size_t k = rows.front().size();
  std::vector<double> marginal(k, 0.0);
  for (const auto& r : rows) {
    if (r.size() != k) throw DimensionError("ragged probability table");
    for (std::size_t c = 0; c < k; ++c) marginal[c] += r[c];
  }
  for (double& v : marginal) v /= static_cast<double>(rows.size());
  double mean_kl = 0.0;
  for (const auto& r : rows) mean_kl += KlDivergence(r, marginal);
  mean_kl /= static_cast<double>(rows.size());
  return std::exp(mean_kl);
}

MeanStderr InceptionStyleScore(const std::vector<std::vector<double>>& rows,
                               std::size_t splits) {
  if (rows.empty()) throw ContractError("score of an empty table");
  if (splits == 0) throw ContractError("split count must be positive");
  splits = std::min(splits, rows.size());
  std::vector<double> scores;
  scores.reserve(splits);
  for (std::size_t s = 0; s < splits; ++s) {
    const std::size_t lo = s * rows.size() / splits;
    const std::size_t hi = (s + 1) * rows.size() / splits;
    scores.push_back(InceptionScoreOfTable(
        std::vector<std::vector<double>>(rows.begin() + lo, rows.begin() + hi)));
  }
  return Summarize(scores);
}

MeanStderr InceptionStyleScore(const Tensor& samples, const ProbClassifier& clf,
                               std::size_t splits) {
  return InceptionStyleScore(clf.Probabilities(samples), splits);
}

double JsPointScore(double p) {
  const double a[2] = {p, 1.0 - p};
  const double half[2] = {0.5, 0.5};
  return 0.5 * KlDivergence(a, half) + 0.5 * KlDivergence(half, a);
}

MeanStderr JsScoreFromProbabilities(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ContractError("no predictions to score");
  std::vector<double> s(probabilities.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = JsPointScore(probabilities[i]);
  return Summarize(s);
}

MeanStderr JsQualityScore(const Tensor& real, const Tensor& synth,
                          const JsConfig& config) {
  if (real.rows() == 0 || synth.rows() == 0) {
    throw ContractError("JS score needs non-empty real and synthetic sets");
  }
  if (real.cols() != synth.cols()) {
    throw DimensionError("real and synthetic points differ in dimension");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw ContractError("train_fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(config.seed);
  const std::size_t n = std::min(real.rows(), synth.rows());
  const std::size_t d = real.cols();
  std::vector<std::size_t> ri(real.rows()), si(synth.rows());
  std::iota(ri.begin(), ri.end(), 0);
  std::iota(si.begin(), si.end(), 0);
  std::shuffle(ri.begin(), ri.end(), rng);
  std::shuffle(si.begin(), si.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * config.train_fraction));
  if (n_train == 0 || n_train == n) {
    throw ContractError("JS score split leaves an empty part");
  }

  // Rows [0, 2 n_train) train the probe, the rest are held out.
  Tensor x = Tensor::Zeros(2 * n, d);
  std::vector<double> label(2 * n);
  const double real_label = config.swap_labels ? 0.0 : 1.0;
  std::size_t row = 0;
  auto put = [&](std::span<const double> src, double y) {
    std::copy(src.begin(), src.end(), x.row(row).begin());
    label[row++] = y;
  };
  for (std::size_t i = 0; i < n_train; ++i) {
    put(real.row(ri[i]), real_label);
    put(synth.row(si[i]), 1.0 - real_label);
  }
  for (std::size_t i = n_train; i < n; ++i) {
    put(real.row(ri[i]), real_label);
    put(synth.row(si[i]), 1.0 - real_label);
  }
  const std::size_t train_rows = 2 * n_train;
  if (config.shuffle_labels) {
    std::shuffle(label.begin(), label.begin() + train_rows, rng);
  }

  Network probe = Network::Mlp(LayerSizes(d, config.hidden, 1),
                               config.activation, Activation::kIdentity, rng);
  AdamState adam(probe.num_params(), config.adam);
  std::vector<double> grad(probe.num_params());
  const std::size_t m = std::min(config.m, train_rows);
  std::vector<std::size_t> order(train_rows);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t it = 0; it < config.iters; ++it) {
    // Partial Fisher-Yates draw of m training rows.
    for (std::size_t j = 0; j < m; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, train_rows - 1);
      std::swap(order[j], order[pick(rng)]);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t r = order[j];
      const ForwardTrace trace = probe.Trace(x.row(r));
      const double z = trace.output()[0];
      if (!std::isfinite(z)) throw DivergenceError("JS probe diverged", static_cast<long>(r));
      const double d_out = (Sigmoid(z) - label[r]) * scale;
      probe.Backward(trace, std::span<const double>(&d_out, 1), grad, {});
    }
    adam.Step(grad, probe.params());
  }

  std::vector<double> predictions;
  predictions.reserve(2 * (n - n_train));
  for (std::size_t r = train_rows; r < 2 * n; ++r) {
    const double z = probe.Evaluate(x.row(r))[0];
    if (!std::isfinite(z)) throw DivergenceError("JS probe diverged", static_cast<long>(r));
    predictions.push_back(Sigmoid(z));
  }
  return JsScoreFromProbabilities(predictions);
}

namespace {

std::vector<std::size_t> ModeCounts(
    const Tensor& samples, const std::vector<std::vector<double>>& centers,
    double radius, std::size_t* near_any) {
  std::vector<std::size_t> counts(centers.size(), 0);
  const double r2 = radius * radius;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto x = samples.row(i);
    bool hit = false;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (centers[c].size() != x.size()) {
        throw DimensionError("mode centre and sample differ in dimension");
      }
      double dist2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        dist2 += (x[j] - centers[c][j]) * (x[j] - centers[c][j]);
      }
      if (dist2 <= r2) {
        ++counts[c];
        hit = true;
      }
    }
    if (hit) ++hits;
  }
  if (near_any != nullptr) *near_any = hits;
  return counts;
}

}  // namespace

double ModeCoverage(const Tensor& samples,
                    const std::vector<std::vector<double>>& centers, double std,
                    double threshold_sd) {
  if (centers.empty()) throw ContractError("mode coverage needs mode centres");
  if (samples.rows() == 0) return 0.0;
  const auto counts = ModeCounts(samples, centers, threshold_sd * std, nullptr);
  const double need =
      std::max(1.0, 0.2 * static_cast<double>(samples.rows()) /
                        static_cast<double>(centers.size()));
  std::size_t covered = 0;
  for (std::size_t c : counts) {
    if (static_cast<double>(c) >= need) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(centers.size());
}

double HighQualityFraction(const Tensor& samples,
                           const std::vector<std::vector<double>>& centers,
                           double std, double threshold_sd) {
  if (centers.empty()) throw ContractError("quality fraction needs mode centres");
  if (samples.rows() == 0) return 0.0;
  std::size_t hits = 0;
  ModeCounts(samples, centers, threshold_sd * std, &hits);
  return static_cast<double>(hits) / static_cast<double>(samples.rows());
}

std::string ScoreReport::ToRecord() const {
  std::string out = "scores";
  char buf[96];
  auto add = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), " %s=%.17g", key, v);
    out += buf;
  };
  if (has_inception) {
    add("inception_mean", inception.mean);
    add("inception_stderr", inception.stderr_);
  }
  if (has_js) {
    add("js_mean", js.mean);
    add("js_stderr", js.stderr_);
  }
  if (mode_coverage >= 0.0) add("mode_coverage", mode_coverage);
  if (high_quality_fraction >= 0.0) {
    add("high_quality_fraction", high_quality_fraction);
  }
  return out;
}

void SemiConfig::Validate() const {
  if (!(p_s_final >= 0.0 && p_s_final < 1.0)) {
    throw ConfigError("semi.p_s_final", "must lie in [0, 1)");
  }
  if (!(ramp_start_fraction >= 0.0 && ramp_start_fraction < 1.0)) {
    throw ConfigError("semi.ramp_start_fraction", "must lie in [0, 1)");
  }
  if (m == 0) throw ConfigError("semi.m", "must be positive");
  if (total_iters == 0) throw ConfigError("semi.total_iters", "must be positive");
}

double SyntheticFraction(const SemiConfig& config, std::size_t t) {
  const double total = static_cast<double>(config.total_iters);
  const double start = config.ramp_start_fraction * total;
  const double td = static_cast<double>(t);
  if (td < start || config.p_s_final == 0.0) return 0.0;
  if (t >= config.total_iters) return config.p_s_final;
  return config.p_s_final * (td - start) / (total - start);
}

namespace {

struct SemiStreams {
  std::mt19937_64 c1_init;
  std::mt19937_64 c2_init;
  std::mt19937_64 real;
  std::mt19937_64 synth;
};

SemiStreams MakeStreams(std::uint64_t seed) {
  std::mt19937_64 root(seed);
  SemiStreams s;
  s.c1_init.seed(root());
  s.c2_init.seed(root());
  s.real.seed(root());
  s.synth.seed(root());
  return s;
}

SemiResult RunSemi(const Network* generator, std::size_t latent_dim,
                   const Dataset& labeled, const SemiConfig& config,
                   std::uint64_t seed) {
  config.Validate();
  if (!labeled.has_labels() || labeled.num_classes() < 2) {
    throw ContractError("semi-supervised training needs labeled data");
  }
  if (config.m > labeled.n()) {
    throw ConfigError("semi.m", "exceeds the number of labeled points");
  }
  const int k = labeled.num_classes();
  SemiStreams streams = MakeStreams(seed);
  SemiResult result;
  result.c1 = NewClassifier(labeled.d(), k, config.hidden, config.activation,
                            streams.c1_init);
  AdamState adam1(result.c1.network.num_params(), config.adam);
  std::vector<double> grad1(result.c1.network.num_params());

  AdamState adam2;
  std::vector<double> grad2;
  if (generator != nullptr) {
    if (generator->input_size() != latent_dim ||
        generator->output_size() != labeled.d()) {
      throw DimensionError("generator does not match the labeled data");
    }
    result.c2 = NewClassifier(latent_dim + labeled.d(), k, config.hidden,
                              config.activation, streams.c2_init);
    adam2 = AdamState(result.c2.network.num_params(), config.adam);
    grad2.resize(result.c2.network.num_params());
  }
  const std::size_t d = labeled.d();

  auto joint = [&](const Tensor& codes, const Tensor& images) {
    Tensor zx = Tensor::Zeros(codes.rows(), latent_dim + d);
    for (std::size_t i = 0; i < codes.rows(); ++i) {
      auto dst = zx.row(i);
      std::copy(codes.row(i).begin(), codes.row(i).end(), dst.begin());
      std::copy(images.row(i).begin(), images.row(i).end(),
                dst.begin() + static_cast<std::ptrdiff_t>(latent_dim));
    }
    return zx;
  };

  for (std::size_t t = 1; t <= config.total_iters; ++t) {
    if (generator != nullptr) {
      // C2 learns C1's labels on fresh synthetic pairs.
      const Tensor codes = SampleCodes(config.m, latent_dim, streams.synth);
      const Tensor images = Forward(*generator, codes);
      std::vector<std::vector<double>> targets;
      targets.reserve(config.m);
      for (std::size_t i = 0; i < config.m; ++i) {
        auto p = result.c1.Probabilities(images.row(i));
        targets.push_back(config.soft_pseudo_labels ? std::move(p)
                                                    : OneHot(Argmax(p), k));
      }
      CrossEntropyStep(result.c2.network, joint(codes, images), targets, grad2);
      adam2.Step(grad2, result.c2.network.params());
    }

    const double p_s = SyntheticFraction(config, t);
    const auto n_syn = static_cast<std::size_t>(
        std::floor(static_cast<double>(config.m) * p_s));
    const std::size_t n_real = config.m - n_syn;
    Tensor inputs = Tensor::Zeros(config.m, d);
    std::vector<std::vector<double>> targets;
    targets.reserve(config.m);
    if (n_syn > 0) {
      const Tensor codes = SampleCodes(n_syn, latent_dim, streams.synth);
      const Tensor images = Forward(*generator, codes);
      const Tensor zx = joint(codes, images);
      for (std::size_t i = 0; i < n_syn; ++i) {
        std::copy(images.row(i).begin(), images.row(i).end(),
                  inputs.row(i).begin());
        targets.push_back(OneHot(result.c2.Predict(zx.row(i)), k));
      }
    }
    const Batch real = SampleBatch(labeled, n_real, streams.real);
    for (std::size_t i = 0; i < n_real; ++i) {
      std::copy(real.points.row(i).begin(), real.points.row(i).end(),
                inputs.row(n_syn + i).begin());
      targets.push_back(OneHot(real.labels[i], k));
    }
    result.c1_losses.push_back(
        CrossEntropyStep(result.c1.network, inputs, targets, grad1));
    adam1.Step(grad1, result.c1.network.params());
    result.c1_counts.emplace_back(n_syn, n_real);
  }
  return result;
}

}  // namespace

SemiResult TrainSemiSupervised(const Network& generator, std::size_t latent_dim,
                               const Dataset& labeled, const SemiConfig& config,
                               std::uint64_t seed) {
  return RunSemi(&generator, latent_dim, labeled, config, seed);
}

SemiResult TrainSupervised(const Dataset& labeled, const SemiConfig& config,
                           std::uint64_t seed) {
  return RunSemi(nullptr, 0, labeled, config, seed);
}

}  // namespace dpgan
