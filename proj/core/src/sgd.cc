// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/sgd.h"

#include <string>

#include "ols/errors.h"

namespace ols {

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ConfigError("sgd.learning_rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("sgd.momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ConfigError("sgd.weight_decay must be non-negative");
  }
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("sgd.decay_factor must lie in (0, 1]");
  }
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw ConfigError("sgd.milestones must be strictly increasing");
    }
  }
}

double SgdConfig::lr_at(int epoch) const {
  double lr = learning_rate;
  for (int m : milestones) {
    if (epoch >= m) lr *= decay_factor;
  }
  return lr;
}

void sgd_step(ParamSet& params, const SgdConfig& cfg, int epoch) {
  const double lr = cfg.lr_at(epoch);
  for (Param& p : params) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto vel = p.momentum.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      vel[i] = cfg.momentum * vel[i] + grad[i] + cfg.weight_decay * value[i];
      value[i] -= lr * vel[i];
    }
  }
}

}  // namespace ols
