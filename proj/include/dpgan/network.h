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

// Dense feed-forward networks with hand-written reverse mode, including the
// second-order pass needed for the WGAN gradient penalty.

#ifndef DPGAN_NETWORK_H_
#define DPGAN_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpgan/tensor.h"

namespace dpgan {

enum class Activation : std::uint8_t {
  kIdentity = 0,
  kTanh = 1,
  kLeakyRelu = 2,
};

inline constexpr double kLeakySlope = 0.2;

double Activate(Activation act, double z);
// First derivative. The leaky ReLU kink at exactly 0 takes the positive side.
double ActivateGrad(Activation act, double z);
// Second derivative; zero almost everywhere for piecewise-linear units.
double ActivateCurvature(Activation act, double z);

const char* ActivationName(Activation act);
// Throws ContractError for unknown names.
Activation ParseActivation(const std::string& name);

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class ParamKind : std::uint8_t { kWeight, kBias };

struct ParamTag {
  std::size_t layer = 0;
  ParamKind kind = ParamKind::kWeight;

  friend bool operator==(const ParamTag&, const ParamTag&) = default;
};

// Intermediate values of one forward evaluation, kept for backprop.
struct ForwardTrace {
  // activations[0] is the input; activations[l + 1] is the output of layer l.
  std::vector<std::vector<double>> activations;
  // pre_activations[l] is W_l a_l + b_l.
  std::vector<std::vector<double>> pre_activations;

  std::span<const double> output() const { return activations.back(); }
};

// All scalar parameters live in one flat vector. Layer l occupies
// [weight_offset(l), weight_offset(l) + out*in) for its row-major weight
// matrix followed by `out` biases. Gradients use the same layout.
class Network {
 public:
  Network() = default;
  // Zero-initialized parameters.
  explicit Network(std::vector<LayerSpec> layers);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Network Initialized(std::vector<LayerSpec> layers,
                             std::mt19937_64& rng);
  // Convenience: sizes = {in, h1, ..., out}; hidden layers use `hidden`,
  // the last one uses `output`.
  static Network Mlp(const std::vector<std::size_t>& sizes, Activation hidden,
                     Activation output, std::mt19937_64& rng);

  std::size_t num_layers() const { return layers_.size(); }
  const LayerSpec& layer(std::size_t l) const { return layers_[l]; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t num_params() const { return params_.size(); }

  std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
  std::size_t bias_offset(std::size_t l) const {
    return offsets_[l] + layers_[l].in * layers_[l].out;
  }
  const std::vector<ParamTag>& param_index() const { return tags_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  double weight(std::size_t l, std::size_t row, std::size_t col) const {
    return params_[weight_offset(l) + row * layers_[l].in + col];
  }
  double& weight(std::size_t l, std::size_t row, std::size_t col) {
    return params_[weight_offset(l) + row * layers_[l].in + col];
  }
  double bias(std::size_t l, std::size_t i) const {
    return params_[bias_offset(l) + i];
  }
  double& bias(std::size_t l, std::size_t i) {
    return params_[bias_offset(l) + i];
  }

  std::vector<double> Evaluate(std::span<const double> x) const;
  ForwardTrace Trace(std::span<const double> x) const;

  // Reverse pass for one example. Adds d(output . d_output)/d(params) into
  // `param_grad` (length num_params) and, when `input_grad` is non-empty,
  // writes the gradient with respect to the input there.
  void Backward(const ForwardTrace& trace, std::span<const double> d_output,
                std::span<double> param_grad,
                std::span<double> input_grad) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void Validate() const;

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<ParamTag> tags_;
  std::vector<double> params_;
};

// Evaluates `net` on every row of `batch` ([m x in] -> [m x out]).
Tensor Forward(const Network& net, const Tensor& batch);

// Per-example loss on the network output: returns the loss and writes
// dloss/doutput into the second argument.
using OutputLoss =
    std::function<double(std::span<const double> output,
                         std::span<double> d_output)>;

// One flat gradient vector per batch row, ordered like param_index().
// Throws DivergenceError naming the row if a loss is non-finite.
std::vector<std::vector<double>> PerExampleGradients(const Network& net,
                                                     const OutputLoss& loss,
                                                     const Tensor& batch);

// Gradient of a scalar-output network with respect to its input.
std::vector<double> InputGradient(const Network& net,
                                  std::span<const double> x);

struct PenaltyGradient {
  double penalty = 0.0;
  // d penalty / d params, flat.
  std::vector<double> grad;
  // Input-gradient norm.
  double input_grad_norm = 0.0;
  // Set when the input-gradient norm is exactly zero; grad is then zero.
  bool degenerate = false;
};

// lambda_gp * (||grad_x D(x)||_2 - 1)^2 and its parameter gradient, found by
// differentiating through the input-gradient computation (double backprop).
PenaltyGradient PenaltyParamGradient(const Network& net,
                                     std::span<const double> x,
                                     double lambda_gp);

}  // namespace dpgan

#endif  // DPGAN_NETWORK_H_
