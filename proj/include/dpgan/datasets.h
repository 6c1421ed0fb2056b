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

#ifndef DPGAN_DATASETS_H_
#define DPGAN_DATASETS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpgan/tensor.h"

namespace dpgan {

// Read counters for a dataset. Training code is expected to touch private
// data only through SampleBatch; tests attach a log to check that.
struct DataAccessLog {
  std::uint64_t batch_calls = 0;
  std::uint64_t batch_rows = 0;
  std::uint64_t direct_reads = 0;
};

// Immutable point set in [-1, 1]^d with optional integer labels.
class Dataset {
 public:
  Dataset() = default;
  // Throws ContractError on empty data, values outside [-1, 1] (beyond
  // 1e-12), non-finite values or labels outside [0, num_classes).
  Dataset(Tensor points, std::vector<int> labels = {}, int num_classes = 0);

  std::size_t n() const { return points_.rows(); }
  std::size_t d() const { return points_.cols(); }
  bool has_labels() const { return !labels_.empty(); }
  int num_classes() const { return num_classes_; }

  // Direct accessors; each call is counted as a direct read.
  const Tensor& points() const;
  std::span<const double> row(std::size_t i) const;
  const std::vector<int>& labels() const;

  // Subset in the given index order, labels carried along.
  Dataset Subset(std::span<const std::size_t> indices) const;

  void AttachAccessLog(std::shared_ptr<DataAccessLog> log) { log_ = std::move(log); }
  const std::shared_ptr<DataAccessLog>& access_log() const { return log_; }

 private:
  friend struct BatchSampler;

  Tensor points_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  std::shared_ptr<DataAccessLog> log_;
};

enum class ToyFamily : std::uint8_t { kRing, kGrid, kMoons, kDigits8x8 };

const char* ToyFamilyName(ToyFamily f);
ToyFamily ParseToyFamily(const std::string& name);

struct ToySpec {
  ToyFamily family = ToyFamily::kRing;
  int modes = 8;
  double radius = 0.8;
  double std = 0.05;
  std::size_t n = 8000;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Blob centres for ring and grid families; empty for the others.
std::vector<std::vector<double>> ModeCenters(const ToySpec& spec);

// ring: `modes` Gaussian blobs evenly spaced on a circle, label = blob.
// grid: modes = s*s blobs on an s x s lattice spanning [-radius, radius]^2.
// moons: two interleaved half circles with Gaussian jitter, labels 0/1.
// digits8x8: 10 glyph templates rendered as 8x8 images with pixel noise of
//   `std` (fraction of full scale), rescaled from [0, 255] to [-1, 1].
// Points are clamped to [-1, 1]. Deterministic for a given seed.
Dataset MakeToy(const ToySpec& spec);

struct SplitSpec {
  double public_fraction = 0.02;
  std::uint64_t seed = 0;
};

struct DataSplit {
  Dataset public_data;
  Dataset private_data;
  std::vector<std::size_t> public_indices;
  std::vector<std::size_t> private_indices;
};

// Seeded uniform split with floor(n * fraction) public points. Throws
// ContractError if that is zero or leaves no private points.
DataSplit SplitPublicPrivate(const Dataset& ds, const SplitSpec& spec);

struct Batch {
  Tensor points;
  std::vector<int> labels;  // empty when the dataset is unlabeled
  std::vector<std::size_t> indices;
  double q = 0.0;  // m / n
};

// m rows drawn uniformly without replacement. Throws ContractError if m > n
// or m == 0.
Batch SampleBatch(const Dataset& ds, std::size_t m, std::mt19937_64& rng);

struct CsvOptions {
  bool header = false;
  bool labeled = true;  // last column is an integer label
  bool pixels = false;  // values are in [0, 255] and get rescaled
};

// Comma-separated points, one per row. Throws FormatError naming the line.
Dataset ReadCsv(const std::string& path, const CsvOptions& options);
void WriteCsv(const Dataset& ds, const std::string& path);
// Rows of a tensor without labels.
void WriteCsv(const Tensor& points, const std::string& path);

}  // namespace dpgan

#endif  // DPGAN_DATASETS_H_
