// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ols/tensor.h"

namespace ols {

enum class Split { kTrain, kTest };

std::string to_string(Split split);

// Labelled samples. `labels` are the labels used for training (possibly
// corrupted); `clean_labels` are the originals.
struct Dataset {
  Tensor features;  // [n x d] or [n x C x H x W]
  std::vector<int> labels;
  std::vector<int> clean_labels;
  std::size_t num_classes = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  Shape sample_shape() const;

  // Fraction of samples whose label differs from the clean label.
  double noise_rate() const;

  // Throws DataError when labels are out of range or lengths disagree.
  void validate() const;

  // Number of samples per (training) label.
  std::vector<std::size_t> class_counts() const;
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// A mini-batch gathered from a dataset, keeping the original sample indices.
struct Batch {
  Tensor features;
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

Batch gather(const Dataset& ds, std::span<const std::size_t> indices);

// One seeded shuffle of [0, n) split into consecutive batches; the last
// batch may be short.
class BatchPlan {
 public:
  BatchPlan(std::size_t n, std::size_t batch_size, std::uint64_t epoch_seed);

  std::size_t size() const { return bounds_.size() - 1; }
  std::span<const std::size_t> indices(std::size_t b) const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::size_t> bounds_;
};

BatchPlan batches(const Dataset& ds, std::size_t batch_size,
                  std::uint64_t epoch_seed);

// CSV with header f0,...,f{d-1},label,clean_label. Only flat [n x d]
// features are supported.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path,
                         std::size_t num_classes, Split split);

}  // namespace ols
