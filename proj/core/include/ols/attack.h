// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "ols/dataset.h"
#include "ols/network.h"

namespace ols {

enum class AttackMethod { kFgsm, kPgd };

std::string to_string(AttackMethod m);
AttackMethod parse_attack_method(const std::string& tag);

struct AttackConfig {
  AttackMethod method = AttackMethod::kFgsm;
  double step = 0.0;     // gamma
  double epsilon = 0.0;  // l-inf radius around the clean input
  int iterations = 1;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool random_start = false;  // PGD only
  std::uint64_t seed = 0;

  // FGSM with radius eps: step == epsilon == eps, one iteration.
  static AttackConfig fgsm(double eps);
  // PGD with the default step eps / 4.
  static AttackConfig pgd(double eps, int iterations, bool random_start = true,
                          std::uint64_t seed = 0);

  // Steps are non-negative (0 is the clean baseline), FGSM has
  // iterations == 1 and step == epsilon, lo <= hi.
  void validate() const;
};

// A bound given in 0-255 pixel units, for inputs scaled to [0, 1].
inline double from_pixel_units(double v) { return v / 255.0; }

// clip(x + step * sign(grad_x CE(x, y)), lo, hi) with the hard-label loss;
// sign(0) = 0.
Tensor fgsm_attack(const Network& net, const Tensor& x, std::span<const int> y,
                   const AttackConfig& cfg);

// Optional seeded uniform start in the ball, then `iterations` signed steps,
// each projected onto the epsilon ball around x and onto [lo, hi].
Tensor pgd_attack(const Network& net, const Tensor& x, std::span<const int> y,
                  const AttackConfig& cfg);

struct RobustResult {
  double top1_error = 0.0;
  Tensor adversarial;  // attacked inputs, same shape as the dataset features
};

// Top-1 error % on attacked inputs, computed in chunks of batch_size.
RobustResult robust_error(const Network& net, const Dataset& ds,
                          const AttackConfig& cfg, std::size_t batch_size = 256);

}  // namespace ols
