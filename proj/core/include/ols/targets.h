// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ols {

// Probability vector over K classes: entries >= 0, summing to 1 within 1e-9.
class TargetDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Throws ParameterError unless `probs` is a valid distribution.
  explicit TargetDistribution(std::vector<double> probs);

  static TargetDistribution uniform(std::size_t num_classes);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const TargetDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

// One-hot at y.
TargetDistribution hard_target(int y, std::size_t num_classes);

// (1 - eps) * onehot(y) + eps / K.
TargetDistribution uniform_ls_target(int y, std::size_t num_classes,
                                     double epsilon);

// Teacher-free KD distribution: a at y, (1 - a) / (K - 1) elsewhere.
TargetDistribution tfkd_target(int y, std::size_t num_classes, double a);

enum class BootstrapMode { kSoft, kHard };

// beta * onehot(y) + (1 - beta) * p            (soft)
// beta * onehot(y) + (1 - beta) * onehot(argmax p)  (hard)
// `probs` is treated as a constant.
TargetDistribution bootstrap_target(int y, std::span<const double> probs,
                                    double beta, BootstrapMode mode);

// -sum_k t_k log max(p_k, 1e-12).
double soft_ce_loss(std::span<const double> probs, const TargetDistribution& t);

struct CombinedLoss {
  double total = 0.0;
  double hard = 0.0;
  double soft = 0.0;
};

// total = alpha * (-log p_y) + (1 - alpha) * soft_ce_loss(p, t).
CombinedLoss combined_loss(std::span<const double> probs, int y,
                           const TargetDistribution& t, double alpha);

// Target-generation rules. Parameter ranges are checked by validate().
namespace strategy {
struct Hard {};
struct UniformLS {
  double epsilon = 0.1;
};
struct TfKD {
  double a = 0.95;
};
struct BootstrapSoft {
  double beta = 0.95;
};
struct BootstrapHard {
  double beta = 0.95;
};
struct OLS {
  double alpha = 0.5;
};
struct OLSSingle {
  double alpha = 0.5;
};
}  // namespace strategy

using LabelStrategy =
    std::variant<strategy::Hard, strategy::UniformLS, strategy::TfKD,
                 strategy::BootstrapSoft, strategy::BootstrapHard,
                 strategy::OLS, strategy::OLSSingle>;

void validate(const LabelStrategy& s);

// Stable lower-case tag: hard, uniform_ls, tfkd, bootstrap_soft,
// bootstrap_hard, ols, ols_single.
std::string strategy_name(const LabelStrategy& s);

// Weight of the hard-label term in the combined loss. Strategies other than
// OLS and OLS-Single put their whole target into the soft term.
double hard_weight(const LabelStrategy& s);

bool uses_soft_label_bank(const LabelStrategy& s);

}  // namespace ols
