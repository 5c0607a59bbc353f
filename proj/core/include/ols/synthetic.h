// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ols/dataset.h"

namespace ols {

enum class MeanLayout {
  kRing,    // class k at angle 2*pi*k/K on a circle in the first two axes
  kCustom,  // caller-supplied coordinates
};

// Gaussian clusters with identity covariance, one per class.
struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 200;
  std::size_t dim = 2;
  MeanLayout layout = MeanLayout::kRing;
  double radius = 4.0;
  std::vector<std::vector<double>> means;  // kCustom only, K rows of dim
  std::uint64_t seed = 0;

  // Throws ConfigError on invalid sizes.
  void validate() const;
};

std::vector<std::vector<double>> class_means(const SyntheticSpec& spec);

// Train samples are drawn first, then test samples, from one seeded stream.
DatasetPair make_synthetic(const SyntheticSpec& spec);

}  // namespace ols
