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

#include "dpgan/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "dpgan/errors.h"

namespace dpgan {

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  const std::size_t expected =
      std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                      std::multiplies<>());
  if (expected != values_.size()) {
    throw DimensionError("tensor shape holds " + std::to_string(expected) +
                         " values but " + std::to_string(values_.size()) +
                         " were given");
  }
}

Tensor Tensor::Zeros(std::size_t rows, std::size_t cols) {
  return Tensor({rows, cols}, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw DimensionError("tensor is not a matrix");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw DimensionError("tensor is not a matrix");
  return shape_[1];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t c = cols();
  return std::span<double>(values_).subspan(i * c, c);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t c = cols();
  return std::span<const double>(values_).subspan(i * c, c);
}

bool Tensor::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::RequireFinite(const char* what) const {
  if (!AllFinite()) {
    throw ContractError(std::string(what) + " contains non-finite values");
  }
}

}  // namespace dpgan
