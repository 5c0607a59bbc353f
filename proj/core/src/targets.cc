// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/targets.h"

#include <algorithm>
#include <cmath>

#include "ols/errors.h"
#include "ols/network.h"
#include "ols/tensor.h"

namespace ols {
namespace {

void check_class(int y, std::size_t num_classes) {
  if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
    throw IndexError("class index " + std::to_string(y) + " outside [0, " +
                     std::to_string(num_classes) + ")");
  }
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ParameterError(std::string(name) + " must lie in [0, 1], got " +
                         std::to_string(v));
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

TargetDistribution::TargetDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ParameterError("empty target distribution");
  double total = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ParameterError("target distribution has a negative or non-finite entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ParameterError("target distribution sums to " + std::to_string(total));
  }
}

TargetDistribution TargetDistribution::uniform(std::size_t num_classes) {
  if (num_classes == 0) throw ParameterError("uniform over zero classes");
  return TargetDistribution(std::vector<double>(
      num_classes, 1.0 / static_cast<double>(num_classes)));
}

TargetDistribution hard_target(int y, std::size_t num_classes) {
  check_class(y, num_classes);
  std::vector<double> p(num_classes, 0.0);
  p[static_cast<std::size_t>(y)] = 1.0;
  return TargetDistribution(std::move(p));
}

TargetDistribution uniform_ls_target(int y, std::size_t num_classes,
                                     double epsilon) {
  check_class(y, num_classes);
  check_unit(epsilon, "epsilon");
  const double off = epsilon / static_cast<double>(num_classes);
  std::vector<double> p(num_classes, off);
  p[static_cast<std::size_t>(y)] = (1.0 - epsilon) + off;
  return TargetDistribution(std::move(p));
}

TargetDistribution tfkd_target(int y, std::size_t num_classes, double a) {
  if (num_classes < 2) throw ParameterError("tfkd target needs K >= 2");
  check_class(y, num_classes);
  if (!(a > 0.0 && a <= 1.0)) {
    throw ParameterError("tfkd a must lie in (0, 1], got " + std::to_string(a));
  }
  std::vector<double> p(num_classes,
                        (1.0 - a) / static_cast<double>(num_classes - 1));
  p[static_cast<std::size_t>(y)] = a;
  return TargetDistribution(std::move(p));
}

TargetDistribution bootstrap_target(int y, std::span<const double> probs,
                                    double beta, BootstrapMode mode) {
  const std::size_t k = probs.size();
  check_class(y, k);
  check_unit(beta, "beta");
  std::vector<double> p(k, 0.0);
  if (mode == BootstrapMode::kSoft) {
    for (std::size_t c = 0; c < k; ++c) p[c] = (1.0 - beta) * probs[c];
  } else {
    p[argmax(probs)] = 1.0 - beta;
  }
  p[static_cast<std::size_t>(y)] += beta;
  return TargetDistribution(std::move(p));
}

double soft_ce_loss(std::span<const double> probs, const TargetDistribution& t) {
  if (probs.size() != t.size()) {
    throw DimensionError("soft_ce_loss: " + std::to_string(probs.size()) +
                         " probabilities vs " + std::to_string(t.size()) +
                         " target entries");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    loss -= t[k] * std::log(std::max(probs[k], kLogFloor));
  }
  return loss;
}

CombinedLoss combined_loss(std::span<const double> probs, int y,
                           const TargetDistribution& t, double alpha) {
  check_class(y, probs.size());
  check_unit(alpha, "alpha");
  CombinedLoss out;
  out.hard = -std::log(std::max(probs[static_cast<std::size_t>(y)], kLogFloor));
  out.soft = soft_ce_loss(probs, t);
  out.total = alpha * out.hard + (1.0 - alpha) * out.soft;
  return out;
}

void validate(const LabelStrategy& s) {
  std::visit(Overloaded{
                 [](const strategy::Hard&) {},
                 [](const strategy::UniformLS& v) { check_unit(v.epsilon, "epsilon"); },
                 [](const strategy::TfKD& v) {
                   if (!(v.a > 0.0 && v.a <= 1.0)) {
                     throw ParameterError("tfkd a must lie in (0, 1]");
                   }
                 },
                 [](const strategy::BootstrapSoft& v) { check_unit(v.beta, "beta"); },
                 [](const strategy::BootstrapHard& v) { check_unit(v.beta, "beta"); },
                 [](const strategy::OLS& v) { check_unit(v.alpha, "alpha"); },
                 [](const strategy::OLSSingle& v) { check_unit(v.alpha, "alpha"); },
             },
             s);
}

std::string strategy_name(const LabelStrategy& s) {
  return std::visit(
      Overloaded{
          [](const strategy::Hard&) { return std::string("hard"); },
          [](const strategy::UniformLS&) { return std::string("uniform_ls"); },
          [](const strategy::TfKD&) { return std::string("tfkd"); },
          [](const strategy::BootstrapSoft&) { return std::string("bootstrap_soft"); },
          [](const strategy::BootstrapHard&) { return std::string("bootstrap_hard"); },
          [](const strategy::OLS&) { return std::string("ols"); },
          [](const strategy::OLSSingle&) { return std::string("ols_single"); },
      },
      s);
}

double hard_weight(const LabelStrategy& s) {
  if (std::holds_alternative<strategy::Hard>(s)) return 1.0;
  if (const auto* o = std::get_if<strategy::OLS>(&s)) return o->alpha;
  if (const auto* o = std::get_if<strategy::OLSSingle>(&s)) return o->alpha;
  return 0.0;
}

bool uses_soft_label_bank(const LabelStrategy& s) {
  return std::holds_alternative<strategy::OLS>(s);
}

}  // namespace ols
