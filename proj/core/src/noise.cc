// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/noise.h"

#include <cmath>
#include <numeric>
#include <random>

#include "ols/errors.h"

namespace ols {

Dataset inject_symmetric_noise(Dataset ds, const NoiseSpec& spec) {
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
    throw ParameterError("noise rate must lie in [0, 1]");
  }
  if (ds.num_classes < 2 && spec.rate > 0.0) {
    throw ParameterError("label noise needs K >= 2");
  }
  const std::size_t n = ds.size();
  const auto flips = static_cast<std::size_t>(
      std::llround(spec.rate * static_cast<double>(n)));
  if (flips == 0) return ds;

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `flips` slots are a uniform subset.
  for (std::size_t i = 0; i < flips; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::uniform_int_distribution<int> wrong(0, static_cast<int>(ds.num_classes) - 2);
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t idx = order[i];
    const int clean = ds.clean_labels[idx];
    const int r = wrong(rng);
    ds.labels[idx] = r < clean ? r : r + 1;
  }
  return ds;
}

}  // namespace ols
