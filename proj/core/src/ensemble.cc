// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/ensemble.h"

#include <cmath>

#include "ols/errors.h"
#include "ols/trainer.h"

namespace ols {

Tensor ensemble_predict(std::span<const Model> members, const Tensor& x,
                        std::size_t batch_size) {
  if (members.empty()) throw ConfigError("ensemble needs at least one model");
  for (const Model& m : members) {
    if (!(m.spec == members.front().spec)) {
      throw ConfigError("ensemble members have different model specs");
    }
  }
  Tensor sum = predict_all(members.front().net, x, batch_size);
  for (std::size_t i = 1; i < members.size(); ++i) {
    const Tensor p = predict_all(members[i].net, x, batch_size);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += p[j];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& v : sum.data()) v *= inv;
  return sum;
}

std::vector<std::size_t> uniform_selection(std::size_t n, std::size_t m) {
  if (m == 0 || m > n) {
    throw ConfigError("cannot pick " + std::to_string(m) + " of " +
                      std::to_string(n) + " checkpoints");
  }
  std::vector<std::size_t> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i + 1) * static_cast<double>(n) /
                       static_cast<double>(m);
    out.push_back(static_cast<std::size_t>(std::llround(pos)) - 1);
  }
  return out;
}

}  // namespace ols
