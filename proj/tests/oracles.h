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

// Independent reference implementations used by the unit and acceptance
// tests. They trade speed for directness.

#ifndef DPGAN_TESTS_ORACLES_H_
#define DPGAN_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

namespace dpgan::oracle {

inline double LogAddExp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of the two log-moment integrals by composite Simpson on `points`
// nodes over a wide fixed window, summed in log space.
struct LogMomentParts {
  double log_e1;
  double log_e2;
  double alpha() const { return std::max(log_e1, log_e2); }
};

inline LogMomentParts SimpsonLogMoment(double q, double sigma, int lambda,
                                       std::size_t points = 1'000'001) {
  if (points % 2 == 0) ++points;
  const double lo = -30.0 * sigma - 5.0;
  const double hi = lambda + 1.0 + 30.0 * sigma + 5.0;
  const double h = (hi - lo) / static_cast<double>(points - 1);
  const double log_norm = -std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  const double two_s2 = 2.0 * sigma * sigma;
  std::vector<double> t1(points), t2(points);
  double m1 = -INFINITY, m2 = -INFINITY;
  for (std::size_t i = 0; i < points; ++i) {
    const double z = lo + h * static_cast<double>(i);
    const double l0 = log_norm - z * z / two_s2;
    const double l1 = log_norm - (z - 1.0) * (z - 1.0) / two_s2;
    const double lmix = q == 0.0 ? l0
                        : q == 1.0
                            ? l1
                            : LogAddExp(std::log1p(-q) + l0, std::log(q) + l1);
    const double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    t1[i] = std::log(w) + l0 + lambda * (l0 - lmix);
    t2[i] = std::log(w) + lmix + lambda * (lmix - l0);
    m1 = std::max(m1, t1[i]);
    m2 = std::max(m2, t2[i]);
  }
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    s1 += std::exp(t1[i] - m1);
    s2 += std::exp(t2[i] - m2);
  }
  const double lh3 = std::log(h / 3.0);
  return {m1 + std::log(s1) + lh3, m2 + std::log(s2) + lh3};
}

// log E2 in closed form for integer lambda:
//   E2 = sum_k C(lambda+1, k) q^k (1-q)^(lambda+1-k) exp((k^2 - k) / (2 sigma^2)).
inline double BinomialLogE2(double q, double sigma, int lambda) {
  const int n = lambda + 1;
  double acc = -INFINITY;
  for (int k = 0; k <= n; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(n - k + 1.0);
    const double term = log_c + (k > 0 ? k * std::log(q) : 0.0) +
                        (n - k > 0 ? (n - k) * std::log1p(-q) : 0.0) +
                        (static_cast<double>(k) * k - k) / (2.0 * sigma * sigma);
    acc = LogAddExp(acc, term);
  }
  return acc;
}

struct OracleGroup {
  std::vector<std::size_t> members;  // sorted
  double bound;
};

// Exhaustive search over every merge order of the given bounds down to k
// groups. Each step is keyed (ratio, smaller min id, larger min id) and the
// lexicographically smallest key sequence wins. Groups come back sorted by
// smallest member.
inline std::vector<OracleGroup> ExhaustiveCluster(const std::vector<double>& bounds,
                                                  std::size_t k) {
  using Key = std::tuple<double, std::size_t, std::size_t>;
  std::vector<OracleGroup> start;
  for (std::size_t i = 0; i < bounds.size(); ++i) start.push_back({{i}, bounds[i]});

  std::vector<Key> best_keys;
  std::vector<OracleGroup> best;
  bool have_best = false;
  std::vector<Key> keys;

  auto recurse = [&](auto&& self, const std::vector<OracleGroup>& state) -> void {
    if (state.size() <= k) {
      if (!have_best || keys < best_keys) {
        best_keys = keys;
        best = state;
        have_best = true;
      }
      return;
    }
    for (std::size_t a = 0; a < state.size(); ++a) {
      for (std::size_t b = a + 1; b < state.size(); ++b) {
        const double ba = state[a].bound, bb = state[b].bound;
        const double ratio = std::max(ba / bb, bb / ba);
        const std::size_t ma = state[a].members.front();
        const std::size_t mb = state[b].members.front();
        keys.emplace_back(ratio, std::min(ma, mb), std::max(ma, mb));
        // Prune sequences that already lose to the best one found.
        const bool worse =
            have_best &&
            std::lexicographical_compare(best_keys.begin(),
                                         best_keys.begin() +
                                             static_cast<std::ptrdiff_t>(keys.size()),
                                         keys.begin(), keys.end());
        if (!worse) {
          std::vector<OracleGroup> next;
          for (std::size_t i = 0; i < state.size(); ++i) {
            if (i != a && i != b) next.push_back(state[i]);
          }
          OracleGroup merged;
          std::merge(state[a].members.begin(), state[a].members.end(),
                     state[b].members.begin(), state[b].members.end(),
                     std::back_inserter(merged.members));
          merged.bound = std::sqrt(ba * ba + bb * bb);
          next.push_back(std::move(merged));
          self(self, next);
        }
        keys.pop_back();
      }
    }
  };
  recurse(recurse, start);
  std::sort(best.begin(), best.end(), [](const OracleGroup& x, const OracleGroup& y) {
    return x.members.front() < y.members.front();
  });
  return best;
}

// Fixed bound multisets of size 1 to 6, ties included.
inline std::vector<std::vector<double>> ClusterFixtures() {
  return {
      {2.0},
      {1.0, 3.0},
      {1.0, 1.1, 4.0, 4.2},
      {0.5, 0.5, 0.5},
      {1.0, 2.0, 4.0},
      {4.0, 2.0, 1.0, 8.0},
      {1.0, 1.0, 2.0, 2.0},
      {0.1, 10.0, 0.2, 20.0, 5.0},
      {3.0, 1.0, 2.0, 1.5, 0.7, 9.0},
      {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0},
      {2.0, 2.0, 2.0, 2.0, 2.0, 2.0},
      {0.9, 1.0, 1.1, 5.0, 5.5, 6.0},
  };
}

}  // namespace dpgan::oracle

#endif  // DPGAN_TESTS_ORACLES_H_
