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

#include "dpgan/adam.h"

#include <cmath>
#include <string>

#include "dpgan/errors.h"

namespace dpgan {

AdamState::AdamState(std::size_t num_params, AdamHyper hyper)
    : hyper_(hyper),
      first_moment_(num_params, 0.0),
      second_moment_(num_params, 0.0) {}

void AdamState::Step(std::span<const double> grad, std::span<double> params) {
  if (grad.size() != size() || params.size() != size()) {
    throw DimensionError("adam: gradient has " + std::to_string(grad.size()) +
                         " entries for " + std::to_string(size()) +
                         " parameters");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw DivergenceError("adam: non-finite gradient entry " +
                            std::to_string(i));
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(hyper_.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper_.beta2, t);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    first_moment_[i] = hyper_.beta1 * first_moment_[i] + (1.0 - hyper_.beta1) * g;
    second_moment_[i] =
        hyper_.beta2 * second_moment_[i] + (1.0 - hyper_.beta2) * g * g;
    const double m_hat = first_moment_[i] / correction1;
    const double v_hat = second_moment_[i] / correction2;
    params[i] -= hyper_.learning_rate * m_hat / (std::sqrt(v_hat) + hyper_.eps_stab);
  }
}

}  // namespace dpgan
