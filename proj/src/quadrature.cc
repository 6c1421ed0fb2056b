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

#include "dpgan/quadrature.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace dpgan {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for Kronrod nodes 1, 3, 5 and 7 (the centre).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lower;
  double upper;
  double value;
  double error;
  double abs_value;  // integral of |f|, sets the roundoff floor
};

struct ByError {
  bool operator()(const Piece& a, const Piece& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.lower > b.lower;
  }
};

Piece Rule(const std::function<double(double)>& f, double lower, double upper) {
  const double centre = 0.5 * (lower + upper);
  const double half = 0.5 * (upper - lower);
  const double fc = f(centre);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  double abs_kronrod = kKronrodWeights[7] * std::abs(fc);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    kronrod += kKronrodWeights[i] * (f1 + f2);
    abs_kronrod += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  return {lower, upper, kronrod * half, std::abs((kronrod - gauss) * half),
          abs_kronrod * std::abs(half)};
}

// A piece whose estimate is already at the level of rounding in f or in the
// rule itself gains nothing from bisection.
bool AtRoundoff(const Piece& p, double relative_noise) {
  return p.error <= 50.0 * relative_noise * p.abs_value;
}

}  // namespace

QuadratureResult IntegrateAdaptive(const std::function<double(double)>& f,
                                   double lower, double upper,
                                   const QuadratureOptions& options) {
  std::priority_queue<Piece, std::vector<Piece>, ByError> heap;
  std::vector<Piece> settled;
  const std::size_t pieces = std::max<std::size_t>(1, options.initial_pieces);
  const double width = (upper - lower) / static_cast<double>(pieces);
  double active_error = 0.0;
  const double noise = std::max(options.relative_noise,
                                std::numeric_limits<double>::epsilon());
  auto add = [&](const Piece& p) {
    if (AtRoundoff(p, noise)) {
      settled.push_back(p);
    } else {
      active_error += p.error;
      heap.push(p);
    }
  };
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = lower + width * static_cast<double>(i);
    const double b = i + 1 == pieces ? upper : a + width;
    add(Rule(f, a, b));
  }

  while (!heap.empty() && active_error > options.abs_tolerance &&
         heap.size() + settled.size() < options.max_intervals) {
    const Piece worst = heap.top();
    const double mid = 0.5 * (worst.lower + worst.upper);
    if (mid <= worst.lower || mid >= worst.upper) {
      // Interval can no longer be split in double precision.
      break;
    }
    heap.pop();
    active_error -= worst.error;
    add(Rule(f, worst.lower, mid));
    add(Rule(f, mid, worst.upper));
    // Recompute from scratch now and then so running-sum drift cannot
    // fake convergence.
    if (heap.size() % 1024 == 0) {
      std::vector<Piece> all;
      all.reserve(heap.size());
      active_error = 0.0;
      while (!heap.empty()) {
        active_error += heap.top().error;
        all.push_back(heap.top());
        heap.pop();
      }
      for (const Piece& p : all) heap.push(p);
    }
  }

  // Final sums in left-to-right order.
  std::vector<Piece> all = std::move(settled);
  all.reserve(all.size() + heap.size());
  double remaining = 0.0;
  while (!heap.empty()) {
    remaining += heap.top().error;
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const Piece& a, const Piece& b) { return a.lower < b.lower; });
  QuadratureResult result;
  for (const Piece& p : all) {
    result.value += p.value;
    result.error += p.error;
  }
  result.roundoff_error = result.error - remaining;
  result.intervals = all.size();
  result.converged = remaining <= options.abs_tolerance;
  return result;
}

}  // namespace dpgan
