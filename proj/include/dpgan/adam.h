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

#ifndef DPGAN_ADAM_H_
#define DPGAN_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpgan {

struct AdamHyper {
  double learning_rate = 0.002;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps_stab = 1e-8;
};

// Bias-corrected Adam with one moment slot per bound parameter. Applying
// the update to a slice of parameters is the same as running an
// independent optimizer on that slice, since every operation is
// element-wise.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t num_params, AdamHyper hyper);

  // Throws DivergenceError on non-finite gradient entries and
  // DimensionError on length mismatch.
  void Step(std::span<const double> grad, std::span<double> params);

  std::size_t size() const { return first_moment_.size(); }
  std::uint64_t step_count() const { return step_count_; }
  const AdamHyper& hyper() const { return hyper_; }
  const std::vector<double>& first_moment() const { return first_moment_; }
  const std::vector<double>& second_moment() const { return second_moment_; }

 private:
  AdamHyper hyper_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::uint64_t step_count_ = 0;
};

}  // namespace dpgan

#endif  // DPGAN_ADAM_H_
