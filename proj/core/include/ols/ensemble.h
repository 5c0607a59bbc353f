// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ols/model.h"

namespace ols {

// Mean of the members' softmax outputs on x. Members must share one
// ModelSpec (ConfigError otherwise); an empty list is a ConfigError too.
Tensor ensemble_predict(std::span<const Model> members, const Tensor& x,
                        std::size_t batch_size = 256);

// Indices of m members picked uniformly from n ordered ones, always ending at
// the last: round((i + 1) * n / m) - 1 for i = 0..m-1.
std::vector<std::size_t> uniform_selection(std::size_t n, std::size_t m);

}  // namespace ols
