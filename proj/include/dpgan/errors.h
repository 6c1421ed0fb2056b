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

#ifndef DPGAN_ERRORS_H_
#define DPGAN_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpgan {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or layer shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A loss or gradient became non-finite or exploded. `example_index` is the
// offending batch row when one can be named, or -1.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what, long example_index = -1)
      : Error(what), example_index_(example_index) {}
  long example_index() const { return example_index_; }

 private:
  long example_index_;
};

// Log-moment integration did not reach the requested tolerance.
class AccountingError : public Error {
 public:
  using Error::Error;
};

// No noise multiplier in the search bracket satisfies the budget.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// The privacy budget was already spent before training started.
class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Malformed serialized data. `offset` is the byte (or line) position.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace dpgan

#endif  // DPGAN_ERRORS_H_
