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

#include "dpgan/network.h"

#include <cmath>
#include <string>

#include "dpgan/errors.h"

namespace dpgan {

double Activate(Activation act, double z) {
  switch (act) {
    case Activation::kIdentity:
      return z;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kLeakyRelu:
      return z >= 0.0 ? z : kLeakySlope * z;
  }
  return z;
}

double ActivateGrad(Activation act, double z) {
  switch (act) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kLeakyRelu:
      return z >= 0.0 ? 1.0 : kLeakySlope;
  }
  return 1.0;
}

double ActivateCurvature(Activation act, double z) {
  if (act != Activation::kTanh) return 0.0;
  const double t = std::tanh(z);
  return -2.0 * t * (1.0 - t * t);
}

const char* ActivationName(Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kLeakyRelu:
      return "leaky_relu";
  }
  return "unknown";
}

Activation ParseActivation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  throw ContractError("unknown activation '" + name + "'");
}

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  Validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets_.push_back(offset);
    const std::size_t nw = layers_[l].in * layers_[l].out;
    tags_.insert(tags_.end(), nw, ParamTag{l, ParamKind::kWeight});
    tags_.insert(tags_.end(), layers_[l].out, ParamTag{l, ParamKind::kBias});
    offset += nw + layers_[l].out;
  }
  params_.assign(offset, 0.0);
}

void Network::Validate() const {
  if (layers_.empty()) throw DimensionError("network needs at least 1 layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].in == 0 || layers_[l].out == 0) {
      throw DimensionError("layer " + std::to_string(l) + " has a zero size");
    }
    if (l + 1 < layers_.size() && layers_[l].out != layers_[l + 1].in) {
      throw DimensionError("layer " + std::to_string(l) + " outputs " +
                           std::to_string(layers_[l].out) +
                           " values but layer " + std::to_string(l + 1) +
                           " expects " + std::to_string(layers_[l + 1].in));
    }
  }
}

Network Network::Initialized(std::vector<LayerSpec> layers,
                             std::mt19937_64& rng) {
  Network net(std::move(layers));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const LayerSpec& spec = net.layer(l);
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.in + spec.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < spec.in * spec.out; ++i) {
      net.params_[net.weight_offset(l) + i] = dist(rng);
    }
  }
  return net;
}

Network Network::Mlp(const std::vector<std::size_t>& sizes, Activation hidden,
                     Activation output, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw DimensionError("MLP needs at least 2 sizes");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers.push_back({sizes[i], sizes[i + 1],
                      i + 2 == sizes.size() ? output : hidden});
  }
  return Initialized(std::move(layers), rng);
}

std::size_t Network::input_size() const { return layers_.front().in; }
std::size_t Network::output_size() const { return layers_.back().out; }

ForwardTrace Network::Trace(std::span<const double> x) const {
  if (x.size() != input_size()) {
    throw DimensionError("input has " + std::to_string(x.size()) +
                         " features, network expects " +
                         std::to_string(input_size()));
  }
  ForwardTrace trace;
  trace.activations.reserve(layers_.size() + 1);
  trace.pre_activations.reserve(layers_.size());
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = layers_[l];
    const std::vector<double>& a = trace.activations.back();
    std::vector<double> z(spec.out);
    std::vector<double> out(spec.out);
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    for (std::size_t i = 0; i < spec.out; ++i) {
      double acc = b[i];
      const double* wi = w + i * spec.in;
      for (std::size_t j = 0; j < spec.in; ++j) acc += wi[j] * a[j];
      z[i] = acc;
      out[i] = Activate(spec.activation, acc);
    }
    trace.pre_activations.push_back(std::move(z));
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

std::vector<double> Network::Evaluate(std::span<const double> x) const {
  ForwardTrace trace = Trace(x);
  return std::move(trace.activations.back());
}

void Network::Backward(const ForwardTrace& trace,
                       std::span<const double> d_output,
                       std::span<double> param_grad,
                       std::span<double> input_grad) const {
  if (d_output.size() != output_size() || param_grad.size() != num_params()) {
    throw DimensionError("backward buffers do not match the network");
  }
  if (!input_grad.empty() && input_grad.size() != input_size()) {
    throw DimensionError("input gradient buffer has the wrong size");
  }
  const std::size_t last = layers_.size() - 1;
  std::vector<double> delta(d_output.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = d_output[i] * ActivateGrad(layers_[last].activation,
                                          trace.pre_activations[last][i]);
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerSpec& spec = layers_[l];
    const std::vector<double>& a = trace.activations[l];
    double* gw = param_grad.data() + weight_offset(l);
    double* gb = param_grad.data() + bias_offset(l);
    const double* w = params_.data() + weight_offset(l);
    for (std::size_t i = 0; i < spec.out; ++i) {
      double* gwi = gw + i * spec.in;
      for (std::size_t j = 0; j < spec.in; ++j) gwi[j] += delta[i] * a[j];
      gb[i] += delta[i];
    }
    if (l == 0 && input_grad.empty()) break;
    std::vector<double> upstream(spec.in, 0.0);
    for (std::size_t i = 0; i < spec.out; ++i) {
      const double* wi = w + i * spec.in;
      for (std::size_t j = 0; j < spec.in; ++j) upstream[j] += wi[j] * delta[i];
    }
    if (l == 0) {
      std::copy(upstream.begin(), upstream.end(), input_grad.begin());
      break;
    }
    const Activation prev = layers_[l - 1].activation;
    for (std::size_t j = 0; j < spec.in; ++j) {
      upstream[j] *= ActivateGrad(prev, trace.pre_activations[l - 1][j]);
    }
    delta = std::move(upstream);
  }
}

Tensor Forward(const Network& net, const Tensor& batch) {
  if (batch.shape().size() != 2 || batch.cols() != net.input_size()) {
    throw DimensionError("batch width does not match network input size");
  }
  Tensor out = Tensor::Zeros(batch.rows(), net.output_size());
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    const std::vector<double> y = net.Evaluate(batch.row(i));
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::vector<double>> PerExampleGradients(const Network& net,
                                                     const OutputLoss& loss,
                                                     const Tensor& batch) {
  if (batch.shape().size() != 2 || batch.cols() != net.input_size()) {
    throw DimensionError("batch width does not match network input size");
  }
  std::vector<std::vector<double>> grads;
  grads.reserve(batch.rows());
  std::vector<double> d_output(net.output_size());
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    const ForwardTrace trace = net.Trace(batch.row(i));
    std::fill(d_output.begin(), d_output.end(), 0.0);
    const double value = loss(trace.output(), d_output);
    if (!std::isfinite(value)) {
      throw DivergenceError(
          "non-finite loss at example " + std::to_string(i), static_cast<long>(i));
    }
    std::vector<double> g(net.num_params(), 0.0);
    net.Backward(trace, d_output, g, {});
    grads.push_back(std::move(g));
  }
  return grads;
}

std::vector<double> InputGradient(const Network& net,
                                  std::span<const double> x) {
  if (net.output_size() != 1) {
    throw ContractError("input gradient needs a scalar-output network");
  }
  const ForwardTrace trace = net.Trace(x);
  std::vector<double> scratch(net.num_params(), 0.0);
  std::vector<double> gx(net.input_size(), 0.0);
  const double one = 1.0;
  net.Backward(trace, std::span<const double>(&one, 1), scratch, gx);
  return gx;
}

PenaltyGradient PenaltyParamGradient(const Network& net,
                                     std::span<const double> x,
                                     double lambda_gp) {
  if (net.output_size() != 1) {
    throw ContractError("gradient penalty needs a scalar-output network");
  }
  const std::size_t depth = net.num_layers();
  const ForwardTrace trace = net.Trace(x);
  const std::span<const double> params = net.params();

  // Inner backward pass: e[l] = dD/da_l, s[l] = dD/dz_l for layer l.
  std::vector<std::vector<double>> e(depth + 1);
  std::vector<std::vector<double>> s(depth);
  e[depth] = {1.0};
  for (std::size_t l = depth; l-- > 0;) {
    const LayerSpec& spec = net.layer(l);
    s[l].resize(spec.out);
    for (std::size_t i = 0; i < spec.out; ++i) {
      s[l][i] = ActivateGrad(spec.activation, trace.pre_activations[l][i]) *
                e[l + 1][i];
    }
    e[l].assign(spec.in, 0.0);
    const double* w = params.data() + net.weight_offset(l);
    for (std::size_t i = 0; i < spec.out; ++i) {
      for (std::size_t j = 0; j < spec.in; ++j) {
        e[l][j] += w[i * spec.in + j] * s[l][i];
      }
    }
  }

  PenaltyGradient result;
  result.grad.assign(net.num_params(), 0.0);
  double sq = 0.0;
  for (double v : e[0]) sq += v * v;
  const double norm = std::sqrt(sq);
  result.input_grad_norm = norm;
  result.penalty = lambda_gp * (norm - 1.0) * (norm - 1.0);
  if (norm == 0.0) {
    result.degenerate = true;
    return result;
  }

  // Adjoint of the inner pass, walked forward through the layers.
  const double scale = 2.0 * lambda_gp * (norm - 1.0) / norm;
  std::vector<double> e_bar(e[0].size());
  for (std::size_t j = 0; j < e_bar.size(); ++j) e_bar[j] = scale * e[0][j];
  std::vector<std::vector<double>> z_bar(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const LayerSpec& spec = net.layer(l);
    const double* w = params.data() + net.weight_offset(l);
    double* gw = result.grad.data() + net.weight_offset(l);
    std::vector<double> s_bar(spec.out, 0.0);
    for (std::size_t i = 0; i < spec.out; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < spec.in; ++j) {
        gw[i * spec.in + j] += s[l][i] * e_bar[j];
        acc += w[i * spec.in + j] * e_bar[j];
      }
      s_bar[i] = acc;
    }
    z_bar[l].resize(spec.out);
    std::vector<double> next(spec.out);
    for (std::size_t i = 0; i < spec.out; ++i) {
      const double z = trace.pre_activations[l][i];
      z_bar[l][i] =
          ActivateCurvature(spec.activation, z) * e[l + 1][i] * s_bar[i];
      next[i] = ActivateGrad(spec.activation, z) * s_bar[i];
    }
    e_bar = std::move(next);
  }

  // Adjoint of the forward pass; the network output itself is unused.
  std::vector<double> a_bar(net.output_size(), 0.0);
  for (std::size_t l = depth; l-- > 0;) {
    const LayerSpec& spec = net.layer(l);
    const double* w = params.data() + net.weight_offset(l);
    double* gw = result.grad.data() + net.weight_offset(l);
    double* gb = result.grad.data() + net.bias_offset(l);
    const std::vector<double>& a = trace.activations[l];
    std::vector<double> prev(spec.in, 0.0);
    for (std::size_t i = 0; i < spec.out; ++i) {
      const double zb =
          z_bar[l][i] +
          ActivateGrad(spec.activation, trace.pre_activations[l][i]) * a_bar[i];
      if (zb == 0.0) continue;
      for (std::size_t j = 0; j < spec.in; ++j) {
        gw[i * spec.in + j] += zb * a[j];
        prev[j] += w[i * spec.in + j] * zb;
      }
      gb[i] += zb;
    }
    a_bar = std::move(prev);
  }
  return result;
}

}  // namespace dpgan
