// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "ols/dataset.h"

namespace ols {

struct NoiseSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

// Symmetric label noise: exactly round(rate * n) distinct samples, chosen
// uniformly, each relabelled uniformly among the K - 1 classes other than
// its clean label. clean_labels are untouched.
Dataset inject_symmetric_noise(Dataset ds, const NoiseSpec& spec);

}  // namespace ols
