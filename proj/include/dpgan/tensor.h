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

#ifndef DPGAN_TENSOR_H_
#define DPGAN_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace dpgan {

// Dense row-major tensor of doubles. Most of the library only uses rank 2
// (a batch of rows), so the matrix accessors assume that shape.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  // rows x cols matrix of zeros.
  static Tensor Zeros(std::size_t rows, std::size_t cols);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;
  double& at(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const {
    return values_[i * cols() + j];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool AllFinite() const;
  // Throws ContractError if any entry is NaN or infinite.
  void RequireFinite(const char* what) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

}  // namespace dpgan

#endif  // DPGAN_TENSOR_H_
