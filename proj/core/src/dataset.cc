// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/dataset.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ols/errors.h"

namespace ols {

std::string to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Shape Dataset::sample_shape() const {
  const Shape& s = features.shape();
  return Shape(s.begin() + (s.empty() ? 0 : 1), s.end());
}

double Dataset::noise_rate() const {
  if (labels.empty()) return 0.0;
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != clean_labels[i]) ++flipped;
  }
  return static_cast<double>(flipped) / static_cast<double>(labels.size());
}

void Dataset::validate() const {
  if (labels.size() != clean_labels.size()) {
    throw DataError("labels and clean_labels differ in length");
  }
  if (features.rank() < 2 || features.dim(0) != labels.size()) {
    throw DataError("feature tensor " + to_string(features.shape()) +
                    " does not hold " + std::to_string(labels.size()) +
                    " samples");
  }
  const auto k = static_cast<int>(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k || clean_labels[i] < 0 ||
        clean_labels[i] >= k) {
      throw DataError("sample " + std::to_string(i) + " has a label outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Batch gather(const Dataset& ds, std::span<const std::size_t> indices) {
  Shape shape = ds.features.shape();
  shape[0] = indices.size();
  Batch b;
  b.features = Tensor(shape);
  b.labels.reserve(indices.size());
  b.indices.assign(indices.begin(), indices.end());
  const std::size_t w = ds.features.row_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = ds.features.row(indices[i]);
    std::copy(src.begin(), src.end(), b.features.data().begin() + i * w);
    b.labels.push_back(ds.labels[indices[i]]);
  }
  return b;
}

BatchPlan::BatchPlan(std::size_t n, std::size_t batch_size,
                     std::uint64_t epoch_seed)
    : order_(n) {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(order_.begin(), order_.end(), rng);
  for (std::size_t start = 0; start < n; start += batch_size) {
    bounds_.push_back(start);
  }
  bounds_.push_back(n);
}

std::span<const std::size_t> BatchPlan::indices(std::size_t b) const {
  return std::span<const std::size_t>(order_).subspan(
      bounds_[b], bounds_[b + 1] - bounds_[b]);
}

BatchPlan batches(const Dataset& ds, std::size_t batch_size,
                  std::uint64_t epoch_seed) {
  return BatchPlan(ds.size(), batch_size, epoch_seed);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  if (ds.features.rank() != 2) {
    throw DimensionError("CSV export needs [n x d] features, got " +
                         to_string(ds.features.shape()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::size_t d = ds.features.dim(1);
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label,clean_label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features.at(i, j));
      out << buf << ',';
    }
    out << ds.labels[i] << ',' << ds.clean_labels[i] << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path,
                         std::size_t num_classes, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 0, "empty file");
  const std::size_t columns =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 3) {
    throw ParseError(path.string(), 0, "need feature, label and clean_label columns");
  }
  const std::size_t d = columns - 2;
  offset += line.size() + 1;

  std::vector<double> values;
  Dataset ds;
  ds.num_classes = num_classes;
  ds.split = split;
  while (std::getline(in, line)) {
    const std::uint64_t row_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(columns);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ParseError(path.string(), row_offset + (p - line.data()),
                         "expected a number");
      }
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') {
        throw ParseError(path.string(), row_offset + (next - line.data()),
                         "expected ','");
      }
      p = next + 1;
    }
    if (row.size() != columns) {
      throw ParseError(path.string(), row_offset,
                       "expected " + std::to_string(columns) + " columns, got " +
                           std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.begin() + d);
    ds.labels.push_back(static_cast<int>(row[d]));
    ds.clean_labels.push_back(static_cast<int>(row[d + 1]));
  }
  ds.features = Tensor({ds.labels.size(), d}, std::move(values));
  ds.validate();
  return ds;
}

}  // namespace ols
