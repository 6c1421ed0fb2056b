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

// Gradient sanitization: per-group l2 clipping, Gaussian perturbation and
// the ways of partitioning discriminator parameters into clipping groups.

#ifndef DPGAN_SANITIZER_H_
#define DPGAN_SANITIZER_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpgan/network.h"

namespace dpgan {

inline constexpr double kBoundFloor = 1e-8;

struct ParameterGroup {
  std::vector<std::size_t> member_ids;  // sorted ascending
  double bound = 1.0;
  // Bound produced by the merge trace, sqrt of the summed squared member
  // bounds. Equal to `bound` unless the plan was rebound to member means.
  double merged_bound = 1.0;
};

enum class PlanStrategy : std::uint8_t {
  kGlobal,
  kWeightBias,
  kClustered,
  kPerParameter,
};

const char* PlanStrategyName(PlanStrategy s);

struct ClippingPlan {
  std::vector<ParameterGroup> groups;
  PlanStrategy strategy = PlanStrategy::kGlobal;
  std::vector<std::string> notices;

  std::size_t num_params() const;
  // Throws ContractError unless the groups partition 0..num_params-1 and
  // every bound is finite and positive.
  void Validate(std::size_t num_params) const;
  // One line per group: strategy, size and bound.
  std::string Dump() const;
  // Short stable fingerprint of the group sizes and bounds for metric logs.
  std::string Digest() const;
};

// g / max(1, ||g|| / c). Throws ContractError unless c > 0.
std::vector<double> ClipGroup(std::span<const double> g, double c);
void ClipGroupInPlace(std::span<double> g, double c);

// Adds i.i.d. N(0, (sigma c)^2) to every coordinate.
std::vector<double> Perturb(std::span<const double> g, double c, double sigma,
                            std::mt19937_64& rng);

ClippingPlan GlobalPlan(std::size_t num_params, double c);
ClippingPlan PerParameterPlan(std::span<const double> bounds);
// Weights in one group bounded by c_w, biases in another bounded by c_b.
// A network without biases yields a single-group plan plus a notice.
ClippingPlan WeightBiasPlan(const Network& net, double c_w, double c_b);

// Greedy agglomeration of per-parameter bounds into k groups: repeatedly
// merge the two groups whose bounds have the smallest ratio, giving the
// union the bound sqrt(c^2 + c'^2). Ties go to the pair whose smallest
// member ids compare lexicographically smallest.
ClippingPlan ClusterWeights(std::span<const double> bounds, std::size_t k);

// Replaces every group's bound with the arithmetic mean of its members'
// per-parameter bounds (floored); merged_bound keeps the trace value.
void RebindToMemberMeans(ClippingPlan& plan, std::span<const double> bounds);

struct AdaptiveBounds {
  // One bound per group of the plan passed in (per parameter when the plan
  // is per-parameter).
  std::vector<double> bounds;
  std::vector<std::string> notices;
};

// Mean over examples of each group's per-example gradient l2 norm, floored
// at kBoundFloor. `per_example` holds flat gradients from a public batch.
AdaptiveBounds EstimateBounds(const std::vector<std::vector<double>>& per_example,
                              const ClippingPlan& plan);
// Per-parameter variant: mean |g_i| over the batch.
AdaptiveBounds EstimateParameterBounds(
    const std::vector<std::vector<double>>& per_example);
// Runs the loss on a public batch first, then estimates per-group bounds.
AdaptiveBounds AdaptiveBoundsFor(const Network& net, const Tensor& public_batch,
                                 const OutputLoss& loss,
                                 const ClippingPlan& plan);

enum class NoisingMode : std::uint8_t { kPerBatch, kPerExample };

const char* NoisingModeName(NoisingMode mode);
NoisingMode ParseNoisingMode(const std::string& name);

// Clips every example's group slices, sums over the batch, adds Gaussian
// noise and divides by m. In kPerBatch mode one draw N(0, (sigma c_j)^2 I)
// per group is added to the sum; in kPerExample mode every example's slice
// gets its own draw before averaging.
std::vector<double> Sanitize(const std::vector<std::vector<double>>& per_example,
                             const ClippingPlan& plan, double sigma,
                             std::mt19937_64& rng,
                             NoisingMode noising = NoisingMode::kPerBatch);

}  // namespace dpgan

#endif  // DPGAN_SANITIZER_H_
