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

#ifndef DPGAN_QUADRATURE_H_
#define DPGAN_QUADRATURE_H_

#include <cstddef>
#include <functional>

namespace dpgan {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // sum of per-interval |K15 - G7| estimates
  // Part of `error` from pieces already at rounding level; those are not
  // bisected further and do not count against the tolerance.
  double roundoff_error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tolerance = 1e-12;
  std::size_t max_intervals = 1'000'000;
  // The range is first cut into this many equal pieces so that narrow
  // peaks far from the centre are not missed by the first estimate.
  std::size_t initial_pieces = 1;
  // Relative error of a single evaluation of f; machine epsilon if smaller.
  double relative_noise = 0.0;
};

// Globally adaptive Gauss-Kronrod (7/15) integration: the interval with the
// largest error estimate is bisected until the summed estimate drops below
// the tolerance or the interval cap is hit. Pieces whose estimate is at
// rounding level are set aside.
QuadratureResult IntegrateAdaptive(const std::function<double(double)>& f,
                                   double lower, double upper,
                                   const QuadratureOptions& options);

}  // namespace dpgan

#endif  // DPGAN_QUADRATURE_H_
