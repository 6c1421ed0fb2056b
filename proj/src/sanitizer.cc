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

#include "dpgan/sanitizer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "dpgan/errors.h"

namespace dpgan {

const char* PlanStrategyName(PlanStrategy s) {
  switch (s) {
    case PlanStrategy::kGlobal:
      return "global";
    case PlanStrategy::kWeightBias:
      return "weight_bias";
    case PlanStrategy::kClustered:
      return "clustered";
    case PlanStrategy::kPerParameter:
      return "per_parameter";
  }
  return "unknown";
}

std::size_t ClippingPlan::num_params() const {
  std::size_t n = 0;
  for (const ParameterGroup& g : groups) n += g.member_ids.size();
  return n;
}

void ClippingPlan::Validate(std::size_t num_params) const {
  if (groups.empty()) throw ContractError("clipping plan has no groups");
  std::vector<char> seen(num_params, 0);
  for (const ParameterGroup& g : groups) {
    if (g.member_ids.empty()) throw ContractError("clipping group is empty");
    if (!(g.bound > 0.0) || !std::isfinite(g.bound)) {
      throw ContractError("clipping bound must be finite and positive");
    }
    for (std::size_t id : g.member_ids) {
      if (id >= num_params) {
        throw ContractError("clipping group member out of range");
      }
      if (seen[id]) throw ContractError("clipping groups overlap");
      seen[id] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ContractError("clipping groups do not cover every parameter");
  }
}

std::string ClippingPlan::Dump() const {
  std::ostringstream out;
  char buf[160];
  out << "strategy " << PlanStrategyName(strategy) << " groups "
      << groups.size() << "\n";
  for (std::size_t j = 0; j < groups.size(); ++j) {
    std::snprintf(buf, sizeof buf, "group %zu size %zu bound %.17g merged %.17g\n",
                  j, groups[j].member_ids.size(), groups[j].bound,
                  groups[j].merged_bound);
    out << buf;
  }
  for (const std::string& n : notices) out << "notice " << n << "\n";
  return out.str();
}

std::string ClippingPlan::Digest() const {
  // FNV-1a over sizes and bound bit patterns.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (const ParameterGroup& g : groups) {
    mix(g.member_ids.size());
    std::uint64_t bits;
    std::memcpy(&bits, &g.bound, sizeof bits);
    mix(bits);
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "k%zu:%016llx", groups.size(),
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> ClipGroup(std::span<const double> g, double c) {
  std::vector<double> out(g.begin(), g.end());
  ClipGroupInPlace(out, c);
  return out;
}

void ClipGroupInPlace(std::span<double> g, double c) {
  if (!(c > 0.0)) throw ContractError("clipping bound must be positive");
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double scale = std::max(1.0, std::sqrt(sq) / c);
  if (scale == 1.0) return;
  for (double& v : g) v /= scale;
}

std::vector<double> Perturb(std::span<const double> g, double c, double sigma,
                            std::mt19937_64& rng) {
  std::vector<double> out(g.begin(), g.end());
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = sigma * c;
  for (double& v : out) v += scale * normal(rng);
  return out;
}

ClippingPlan GlobalPlan(std::size_t num_params, double c) {
  ClippingPlan plan;
  plan.strategy = PlanStrategy::kGlobal;
  ParameterGroup g;
  g.member_ids.resize(num_params);
  std::iota(g.member_ids.begin(), g.member_ids.end(), std::size_t{0});
  g.bound = c;
  g.merged_bound = c;
  plan.groups.push_back(std::move(g));
  return plan;
}

ClippingPlan PerParameterPlan(std::span<const double> bounds) {
  ClippingPlan plan;
  plan.strategy = PlanStrategy::kPerParameter;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    plan.groups.push_back({{i}, bounds[i], bounds[i]});
  }
  return plan;
}

ClippingPlan WeightBiasPlan(const Network& net, double c_w, double c_b) {
  ClippingPlan plan;
  plan.strategy = PlanStrategy::kWeightBias;
  ParameterGroup weights{{}, c_w, c_w};
  ParameterGroup biases{{}, c_b, c_b};
  const auto& tags = net.param_index();
  for (std::size_t i = 0; i < tags.size(); ++i) {
    (tags[i].kind == ParamKind::kWeight ? weights : biases)
        .member_ids.push_back(i);
  }
  if (weights.member_ids.empty() || biases.member_ids.empty()) {
    ParameterGroup& only = weights.member_ids.empty() ? biases : weights;
    plan.groups.push_back(std::move(only));
    plan.notices.push_back(
        "network has only one parameter kind; weight/bias separation "
        "collapsed to a single group");
    return plan;
  }
  plan.groups.push_back(std::move(weights));
  plan.groups.push_back(std::move(biases));
  return plan;
}

namespace {

struct Cluster {
  double bound;
  std::vector<std::size_t> members;
  bool alive = true;
};

// Candidate merge; ordered by ratio, then by the pair of smallest member ids.
struct Candidate {
  double ratio;
  std::size_t first_min;
  std::size_t second_min;
  std::size_t a;  // cluster slots
  std::size_t b;

  bool operator>(const Candidate& o) const {
    return std::tie(ratio, first_min, second_min) >
           std::tie(o.ratio, o.first_min, o.second_min);
  }
};

}  // namespace

ClippingPlan ClusterWeights(std::span<const double> bounds, std::size_t k) {
  const std::size_t n = bounds.size();
  if (k < 1 || k > n) {
    throw ContractError("cluster count must lie in [1, parameter count]");
  }
  for (double b : bounds) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw ContractError("per-parameter bounds must be finite and positive");
    }
  }

  std::vector<Cluster> clusters;
  clusters.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({bounds[i], {i}});

  // Clusters ordered by (bound, smallest member id): the closest pair in
  // ratio is always adjacent in this order.
  using OrderKey = std::pair<double, std::size_t>;
  auto key_of = [&](std::size_t slot) {
    return OrderKey{clusters[slot].bound, clusters[slot].members.front()};
  };
  std::set<std::pair<OrderKey, std::size_t>> order;
  for (std::size_t i = 0; i < n; ++i) order.insert({key_of(i), i});

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  auto push_pair = [&](std::size_t lo, std::size_t hi) {
    const double ratio = std::max(clusters[lo].bound / clusters[hi].bound,
                                  clusters[hi].bound / clusters[lo].bound);
    const std::size_t m1 = clusters[lo].members.front();
    const std::size_t m2 = clusters[hi].members.front();
    heap.push({ratio, std::min(m1, m2), std::max(m1, m2), lo, hi});
  };
  for (auto it = order.begin(); it != order.end() && std::next(it) != order.end(); ++it) {
    push_pair(it->second, std::next(it)->second);
  }
  auto adjacent = [&](std::size_t a, std::size_t b) {
    auto it = order.find({key_of(a), a});
    if (it == order.end()) return false;
    auto nx = std::next(it);
    return nx != order.end() && nx->second == b;
  };

  std::size_t remaining = n;
  while (remaining > k) {
    const Candidate c = heap.top();
    heap.pop();
    if (!clusters[c.a].alive || !clusters[c.b].alive || !adjacent(c.a, c.b)) {
      continue;
    }
    auto it_a = order.find({key_of(c.a), c.a});
    auto it_b = std::next(it_a);
    const bool has_prev = it_a != order.begin();
    const std::size_t prev = has_prev ? std::prev(it_a)->second : 0;
    auto after = std::next(it_b);
    const bool has_next = after != order.end();
    const std::size_t next = has_next ? after->second : 0;
    order.erase(it_a);
    order.erase(it_b);
    if (has_prev && has_next) push_pair(prev, next);

    Cluster merged;
    const double ba = clusters[c.a].bound;
    const double bb = clusters[c.b].bound;
    merged.bound = std::sqrt(ba * ba + bb * bb);
    std::merge(clusters[c.a].members.begin(), clusters[c.a].members.end(),
               clusters[c.b].members.begin(), clusters[c.b].members.end(),
               std::back_inserter(merged.members));
    clusters[c.a].alive = false;
    clusters[c.b].alive = false;
    clusters[c.a].members.clear();
    clusters[c.b].members.clear();
    clusters.push_back(std::move(merged));
    const std::size_t slot = clusters.size() - 1;
    auto [pos, inserted] = order.insert({key_of(slot), slot});
    if (pos != order.begin()) push_pair(std::prev(pos)->second, slot);
    if (std::next(pos) != order.end()) push_pair(slot, std::next(pos)->second);
    --remaining;
  }

  ClippingPlan plan;
  plan.strategy = PlanStrategy::kClustered;
  for (const auto& entry : order) {
    const Cluster& c = clusters[entry.second];
    plan.groups.push_back({c.members, c.bound, c.bound});
  }
  std::sort(plan.groups.begin(), plan.groups.end(),
            [](const ParameterGroup& a, const ParameterGroup& b) {
              return a.member_ids.front() < b.member_ids.front();
            });
  return plan;
}

void RebindToMemberMeans(ClippingPlan& plan, std::span<const double> bounds) {
  for (ParameterGroup& g : plan.groups) {
    double sum = 0.0;
    for (std::size_t id : g.member_ids) sum += bounds[id];
    g.bound = std::max(kBoundFloor, sum / static_cast<double>(g.member_ids.size()));
  }
}

AdaptiveBounds EstimateBounds(const std::vector<std::vector<double>>& per_example,
                              const ClippingPlan& plan) {
  if (per_example.empty()) throw ContractError("public batch is empty");
  AdaptiveBounds out;
  out.bounds.assign(plan.groups.size(), 0.0);
  for (const auto& g : per_example) {
    for (std::size_t j = 0; j < plan.groups.size(); ++j) {
      double sq = 0.0;
      for (std::size_t id : plan.groups[j].member_ids) sq += g[id] * g[id];
      out.bounds[j] += std::sqrt(sq);
    }
  }
  std::size_t floored = 0;
  for (double& b : out.bounds) {
    b /= static_cast<double>(per_example.size());
    if (b < kBoundFloor) {
      b = kBoundFloor;
      ++floored;
    }
  }
  if (floored > 0) {
    out.notices.push_back(std::to_string(floored) +
                          " group(s) had vanishing gradients; bound floored");
  }
  return out;
}

AdaptiveBounds EstimateParameterBounds(
    const std::vector<std::vector<double>>& per_example) {
  if (per_example.empty()) throw ContractError("public batch is empty");
  AdaptiveBounds out;
  const std::size_t n = per_example.front().size();
  out.bounds.assign(n, 0.0);
  for (const auto& g : per_example) {
    if (g.size() != n) throw DimensionError("gradient lengths differ");
    for (std::size_t i = 0; i < n; ++i) out.bounds[i] += std::abs(g[i]);
  }
  std::size_t floored = 0;
  for (double& b : out.bounds) {
    b /= static_cast<double>(per_example.size());
    if (b < kBoundFloor) {
      b = kBoundFloor;
      ++floored;
    }
  }
  if (floored > 0) {
    out.notices.push_back(std::to_string(floored) +
                          " parameter(s) had vanishing gradients; bound floored");
  }
  return out;
}

AdaptiveBounds AdaptiveBoundsFor(const Network& net, const Tensor& public_batch,
                                 const OutputLoss& loss,
                                 const ClippingPlan& plan) {
  if (public_batch.shape().size() != 2 || public_batch.rows() == 0) {
    throw ContractError("public batch is empty");
  }
  return EstimateBounds(PerExampleGradients(net, loss, public_batch), plan);
}

const char* NoisingModeName(NoisingMode mode) {
  return mode == NoisingMode::kPerBatch ? "per_batch" : "per_example";
}

NoisingMode ParseNoisingMode(const std::string& name) {
  if (name == "per_batch") return NoisingMode::kPerBatch;
  if (name == "per_example") return NoisingMode::kPerExample;
  throw ContractError("unknown noising mode '" + name + "'");
}

std::vector<double> Sanitize(const std::vector<std::vector<double>>& per_example,
                             const ClippingPlan& plan, double sigma,
                             std::mt19937_64& rng, NoisingMode noising) {
  if (per_example.empty()) throw ContractError("no gradients to sanitize");
  const std::size_t n = per_example.front().size();
  plan.Validate(n);
  if (sigma < 0.0) throw ContractError("sigma must be non-negative");

  // Noise scale per coordinate, so that draws are taken in parameter order
  // and the result does not depend on the order of the groups.
  std::vector<double> noise_scale(n, 0.0);
  for (const ParameterGroup& g : plan.groups) {
    for (std::size_t id : g.member_ids) noise_scale[id] = sigma * g.bound;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  auto add_noise = [&](std::vector<double>& v) {
    if (sigma == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) v[i] += noise_scale[i] * normal(rng);
  };

  std::vector<double> sum(n, 0.0);
  std::vector<double> slice;
  std::vector<double> clipped(n);
  for (const auto& g : per_example) {
    if (g.size() != n) throw ContractError("gradient lengths differ");
    for (const ParameterGroup& group : plan.groups) {
      slice.resize(group.member_ids.size());
      for (std::size_t t = 0; t < slice.size(); ++t) {
        slice[t] = g[group.member_ids[t]];
      }
      ClipGroupInPlace(slice, group.bound);
      for (std::size_t t = 0; t < slice.size(); ++t) {
        clipped[group.member_ids[t]] = slice[t];
      }
    }
    if (noising == NoisingMode::kPerExample) add_noise(clipped);
    for (std::size_t i = 0; i < n; ++i) sum[i] += clipped[i];
  }
  if (noising == NoisingMode::kPerBatch) add_noise(sum);
  const double m = static_cast<double>(per_example.size());
  for (double& v : sum) v /= m;
  return sum;
}

}  // namespace dpgan
