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

#ifndef DPGAN_EVALUATION_H_
#define DPGAN_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpgan/adam.h"
#include "dpgan/datasets.h"
#include "dpgan/network.h"

namespace dpgan {

inline constexpr double kProbabilityFloor = 1e-12;

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Numerically stable softmax of a logit vector.
std::vector<double> Softmax(std::span<const double> logits);

// Network whose identity-activated outputs are read through a softmax.
struct ProbClassifier {
  Network network;
  int num_classes = 0;

  std::vector<double> Probabilities(std::span<const double> x) const;
  std::vector<std::vector<double>> Probabilities(const Tensor& batch) const;
  int Predict(std::span<const double> x) const;
};

struct ClassifierConfig {
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::kTanh;
  std::size_t m = 64;
  std::size_t max_iters = 3000;
  AdamHyper adam{0.01, 0.9, 0.999, 1e-8};
  // Stop early once accuracy on `validation` reaches this (checked every
  // 100 iterations). Zero disables early stopping.
  double target_accuracy = 0.0;
};

// Cross-entropy training on a labeled dataset. Deterministic per seed.
ProbClassifier TrainClassifier(const Dataset& train, const Dataset* validation,
                               const ClassifierConfig& config, std::uint64_t seed);

double Accuracy(const ProbClassifier& clf, const Dataset& data);

// KL(p || q) over discrete distributions. Zero entries of p contribute
// nothing; both sides are floored at 1e-12 inside the logarithm.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// exp(mean_x KL(p(y|x) || p(y))) for one table of conditional rows.
double InceptionScoreOfTable(const std::vector<std::vector<double>>& rows);
// Mean and standard error over `splits` equal contiguous partitions.
MeanStderr InceptionStyleScore(const std::vector<std::vector<double>>& rows,
                               std::size_t splits = 10);
MeanStderr InceptionStyleScore(const Tensor& samples, const ProbClassifier& clf,
                               std::size_t splits = 10);

// 1/2 KL(B_p || B_0.5) + 1/2 KL(B_0.5 || B_p) for a real-vs-synthetic
// prediction p.
double JsPointScore(double p);
// Mean and standard error of JsPointScore over predictions.
MeanStderr JsScoreFromProbabilities(std::span<const double> probabilities);

struct JsConfig {
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::kTanh;
  std::size_t m = 64;
  std::size_t iters = 800;
  AdamHyper adam{0.005, 0.9, 0.999, 1e-8};
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  // Swap which set is labeled "real" when training the probe.
  bool swap_labels = false;
  // Shuffle the real/synthetic labels before training (null control).
  bool shuffle_labels = false;
};

// Trains a fresh real-vs-synthetic probe on a train split of both sets and
// averages JsPointScore of its predictions on the held-out points. Equal
// numbers of real and synthetic points are used.
MeanStderr JsQualityScore(const Tensor& real, const Tensor& synth,
                          const JsConfig& config);

// Fraction of modes holding at least max(1, 0.2 n / modes) of the n
// samples within threshold_sd * std of their centre.
double ModeCoverage(const Tensor& samples,
                    const std::vector<std::vector<double>>& centers, double std,
                    double threshold_sd = 3.0);

// Fraction of samples within threshold_sd * std of any centre.
double HighQualityFraction(const Tensor& samples,
                           const std::vector<std::vector<double>>& centers,
                           double std, double threshold_sd = 3.0);

struct ScoreReport {
  MeanStderr inception;
  MeanStderr js;
  double mode_coverage = -1.0;
  double high_quality_fraction = -1.0;
  bool has_inception = false;
  bool has_js = false;

  // Flat "key=value" record.
  std::string ToRecord() const;
};

struct SemiConfig {
  double p_s_final = 0.2;
  double ramp_start_fraction = 1.0 / 3.0;
  std::size_t m = 64;
  std::size_t total_iters = 1500;
  AdamHyper adam{0.005, 0.9, 0.999, 1e-8};
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::kTanh;
  // Train C2 on C1's full probability vectors instead of argmax labels.
  bool soft_pseudo_labels = false;

  void Validate() const;
};

// Synthetic fraction used at iteration t (1-based): 0 before the ramp
// start, then a linear ramp reaching p_s_final at t == total_iters.
double SyntheticFraction(const SemiConfig& config, std::size_t t);

struct SemiResult {
  ProbClassifier c1;
  ProbClassifier c2;
  // (synthetic, real) example counts fed to C1 at each iteration.
  std::vector<std::pair<std::size_t, std::size_t>> c1_counts;
  // C1's mean cross-entropy per iteration.
  std::vector<double> c1_losses;
};

// Two-classifier semi-supervised training driven by a trained generator.
// C2 sees the code concatenated with the image. Real batches come from a
// random stream separate from the synthetic one, so with p_s_final = 0 C1
// follows TrainSupervised exactly.
SemiResult TrainSemiSupervised(const Network& generator, std::size_t latent_dim,
                               const Dataset& labeled, const SemiConfig& config,
                               std::uint64_t seed);

// C1's training path with no synthetic data.
SemiResult TrainSupervised(const Dataset& labeled, const SemiConfig& config,
                           std::uint64_t seed);

}  // namespace dpgan

#endif  // DPGAN_EVALUATION_H_
