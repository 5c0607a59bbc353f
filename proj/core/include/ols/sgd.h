// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ols/network.h"

namespace ols {

// Momentum SGD with L2 weight decay and a step learning-rate schedule.
struct SgdConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // Epochs (1-based) at which the rate is multiplied by decay_factor.
  std::vector<int> milestones;
  double decay_factor = 0.1;

  // Throws ConfigError when a field is outside its range.
  void validate() const;

  // Learning rate in effect during `epoch`: one decay per milestone <= epoch.
  double lr_at(int epoch) const;
};

// v <- momentum * v + grad + weight_decay * param; param <- param - lr * v.
void sgd_step(ParamSet& params, const SgdConfig& cfg, int epoch);

}  // namespace ols
