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

#include "dpgan/datasets.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dpgan/errors.h"

namespace dpgan {
namespace {

// 8x8 glyphs, '#' = ink.
constexpr const char* kGlyphs[10][8] = {
    {"..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.",
     "..####..", "........"},
    {"...##...", "..###...", "...##...", "...##...", "...##...", "...##...",
     ".######.", "........"},
    {"..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....",
     ".######.", "........"},
    {"..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".##..##.",
     "..####..", "........"},
    {"....##..", "...###..", "..#.##..", ".#..##..", ".######.", "....##..",
     "....##..", "........"},
    {".######.", ".##.....", ".#####..", ".....##.", ".....##.", ".##..##.",
     "..####..", "........"},
    {"..####..", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.",
     "..####..", "........"},
    {".######.", ".....##.", "....##..", "...##...", "...##...", "...##...",
     "...##...", "........"},
    {"..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.",
     "..####..", "........"},
    {"..####..", ".##..##.", ".##..##.", "..#####.", ".....##.", "....##..",
     "..###...", "........"},
};

void CountDirect(const std::shared_ptr<DataAccessLog>& log) {
  if (log) ++log->direct_reads;
}

}  // namespace

struct BatchSampler {
  static Batch Sample(const Dataset& ds, std::size_t m, std::mt19937_64& rng) {
    const std::size_t n = ds.points_.rows();
    if (m == 0 || m > n) {
      throw ContractError("batch size " + std::to_string(m) +
                          " must lie in [1, " + std::to_string(n) + "]");
    }
    // Partial Fisher-Yates over a fresh index permutation.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    Batch batch;
    batch.points = Tensor::Zeros(m, ds.points_.cols());
    for (std::size_t i = 0; i < m; ++i) {
      const auto src = ds.points_.row(idx[i]);
      std::copy(src.begin(), src.end(), batch.points.row(i).begin());
      if (!ds.labels_.empty()) batch.labels.push_back(ds.labels_[idx[i]]);
    }
    batch.indices = std::move(idx);
    batch.q = static_cast<double>(m) / static_cast<double>(n);
    if (ds.log_) {
      ++ds.log_->batch_calls;
      ds.log_->batch_rows += m;
    }
    return batch;
  }
};

Dataset::Dataset(Tensor points, std::vector<int> labels, int num_classes)
    : points_(std::move(points)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (points_.shape().size() != 2 || points_.rows() == 0 || points_.cols() == 0) {
    throw ContractError("dataset needs at least one point");
  }
  for (double v : points_.values()) {
    if (!std::isfinite(v)) throw ContractError("dataset has non-finite values");
    if (std::abs(v) > 1.0 + 1e-12) {
      throw ContractError("dataset values must lie in [-1, 1]");
    }
  }
  if (!labels_.empty()) {
    if (labels_.size() != points_.rows()) {
      throw ContractError("label count differs from point count");
    }
    if (num_classes_ <= 0) {
      num_classes_ = *std::max_element(labels_.begin(), labels_.end()) + 1;
    }
    for (int y : labels_) {
      if (y < 0 || y >= num_classes_) {
        throw ContractError("label out of range");
      }
    }
  }
}

const Tensor& Dataset::points() const {
  CountDirect(log_);
  return points_;
}

std::span<const double> Dataset::row(std::size_t i) const {
  CountDirect(log_);
  return points_.row(i);
}

const std::vector<int>& Dataset::labels() const {
  CountDirect(log_);
  return labels_;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  CountDirect(log_);
  Tensor pts = Tensor::Zeros(indices.size(), points_.cols());
  std::vector<int> labels;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = points_.row(indices[i]);
    std::copy(src.begin(), src.end(), pts.row(i).begin());
    if (!labels_.empty()) labels.push_back(labels_[indices[i]]);
  }
  return Dataset(std::move(pts), std::move(labels), num_classes_);
}

const char* ToyFamilyName(ToyFamily f) {
  switch (f) {
    case ToyFamily::kRing:
      return "ring";
    case ToyFamily::kGrid:
      return "grid";
    case ToyFamily::kMoons:
      return "moons";
    case ToyFamily::kDigits8x8:
      return "digits8x8";
  }
  return "unknown";
}

ToyFamily ParseToyFamily(const std::string& name) {
  if (name == "ring") return ToyFamily::kRing;
  if (name == "grid") return ToyFamily::kGrid;
  if (name == "moons") return ToyFamily::kMoons;
  if (name == "digits8x8") return ToyFamily::kDigits8x8;
  throw ContractError("unknown dataset family '" + name + "'");
}

void ToySpec::Validate() const {
  if (n < 1) throw ContractError("dataset size must be at least 1");
  if (!(std > 0.0)) throw ContractError("blob std must be positive");
  if (family == ToyFamily::kRing || family == ToyFamily::kGrid) {
    if (modes < 1) throw ContractError("mixture needs at least one mode");
  }
  if (family == ToyFamily::kGrid) {
    const int side = static_cast<int>(std::lround(std::sqrt(modes)));
    if (side * side != modes) {
      throw ContractError("grid mode count must be a perfect square");
    }
  }
}

std::vector<std::vector<double>> ModeCenters(const ToySpec& spec) {
  std::vector<std::vector<double>> centers;
  if (spec.family == ToyFamily::kRing) {
    for (int k = 0; k < spec.modes; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / spec.modes;
      centers.push_back({spec.radius * std::cos(angle),
                         spec.radius * std::sin(angle)});
    }
  } else if (spec.family == ToyFamily::kGrid) {
    const int side = static_cast<int>(std::lround(std::sqrt(spec.modes)));
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        const double step = side > 1 ? 2.0 * spec.radius / (side - 1) : 0.0;
        centers.push_back({side > 1 ? -spec.radius + step * i : 0.0,
                           side > 1 ? -spec.radius + step * j : 0.0});
      }
    }
  }
  return centers;
}

Dataset MakeToy(const ToySpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto clamp = [](double v) { return std::clamp(v, -1.0, 1.0); };

  if (spec.family == ToyFamily::kDigits8x8) {
    Tensor pts = Tensor::Zeros(spec.n, 64);
    std::vector<int> labels(spec.n);
    std::uniform_int_distribution<int> digit(0, 9);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const int y = digit(rng);
      labels[i] = y;
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
          const double ink = kGlyphs[y][r][c] == '#' ? 255.0 : 0.0;
          const double pixel =
              std::clamp(ink + 255.0 * spec.std * normal(rng), 0.0, 255.0);
          pts.at(i, static_cast<std::size_t>(r * 8 + c)) = pixel / 127.5 - 1.0;
        }
      }
    }
    return Dataset(std::move(pts), std::move(labels), 10);
  }

  Tensor pts = Tensor::Zeros(spec.n, 2);
  std::vector<int> labels(spec.n);
  if (spec.family == ToyFamily::kMoons) {
    std::uniform_int_distribution<int> which(0, 1);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const int y = which(rng);
      const double t = angle(rng);
      double x0 = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
      double x1 = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
      // Centre the pair of moons on the origin and scale to the radius.
      x0 = (x0 - 0.5) * spec.radius / 1.5;
      x1 = (x1 - 0.25) * spec.radius / 1.5;
      labels[i] = y;
      pts.at(i, 0) = clamp(x0 + spec.std * normal(rng));
      pts.at(i, 1) = clamp(x1 + spec.std * normal(rng));
    }
    return Dataset(std::move(pts), std::move(labels), 2);
  }

  const auto centers = ModeCenters(spec);
  std::uniform_int_distribution<int> mode(0, spec.modes - 1);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int y = mode(rng);
    labels[i] = y;
    pts.at(i, 0) = clamp(centers[y][0] + spec.std * normal(rng));
    pts.at(i, 1) = clamp(centers[y][1] + spec.std * normal(rng));
  }
  return Dataset(std::move(pts), std::move(labels), spec.modes);
}

DataSplit SplitPublicPrivate(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.public_fraction > 0.0 && spec.public_fraction < 1.0)) {
    throw ContractError("public fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.n();
  const auto n_public = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.public_fraction + 1e-9));
  if (n_public < 1) {
    throw ContractError("public fraction " + std::to_string(spec.public_fraction) +
                        " leaves no public points out of " + std::to_string(n));
  }
  if (n_public >= n) throw ContractError("split leaves no private points");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  DataSplit split;
  split.public_indices.assign(idx.begin(), idx.begin() + static_cast<long>(n_public));
  split.private_indices.assign(idx.begin() + static_cast<long>(n_public), idx.end());
  split.public_data = ds.Subset(split.public_indices);
  split.private_data = ds.Subset(split.private_indices);
  return split;
}

Batch SampleBatch(const Dataset& ds, std::size_t m, std::mt19937_64& rng) {
  return BatchSampler::Sample(ds, m, rng);
}

Dataset ReadCsv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV file: " + path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<int> labels;
  if (options.header) {
    std::getline(in, line);
    ++line_no;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw FormatError("CSV cell '" + cell + "' is not a number in " + path,
                          line_no);
      }
    }
    const std::size_t cols = fields.size() - (options.labeled ? 1 : 0);
    if (fields.size() < (options.labeled ? 2u : 1u)) {
      throw FormatError("CSV row has too few columns in " + path, line_no);
    }
    if (width == 0) width = cols;
    if (cols != width) {
      throw FormatError("CSV row width changes in " + path, line_no);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double v = fields[c];
      if (options.pixels) {
        if (v < 0.0 || v > 255.0) {
          throw FormatError("pixel value outside [0, 255] in " + path, line_no);
        }
        v = v / 127.5 - 1.0;
      }
      values.push_back(v);
    }
    if (options.labeled) {
      const double y = fields.back();
      if (y < 0.0 || y != std::floor(y)) {
        throw FormatError("label must be a non-negative integer in " + path,
                          line_no);
      }
      labels.push_back(static_cast<int>(y));
    }
  }
  if (width == 0) throw FormatError("CSV file has no data rows: " + path, line_no);
  const std::size_t rows = values.size() / width;
  try {
    return Dataset(Tensor::Matrix(rows, width, std::move(values)),
                   std::move(labels));
  } catch (const ContractError& e) {
    throw FormatError(std::string(e.what()) + " in " + path, line_no);
  }
}

namespace {

void WriteRows(const Tensor& points, const std::vector<int>* labels,
               const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open CSV file for writing: " + path);
  char buf[32];
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto row = points.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      if (j > 0) out << ',';
      out << buf;
    }
    if (labels != nullptr) out << ',' << (*labels)[i];
    out << '\n';
  }
  if (!out) throw Error("failed writing CSV file: " + path);
}

}  // namespace

void WriteCsv(const Dataset& ds, const std::string& path) {
  WriteRows(ds.points(), ds.has_labels() ? &ds.labels() : nullptr, path);
}

void WriteCsv(const Tensor& points, const std::string& path) {
  WriteRows(points, nullptr, path);
}

}  // namespace dpgan
