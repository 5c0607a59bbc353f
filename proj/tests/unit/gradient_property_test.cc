// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

// Analytic gradients against central finite differences on randomized
// small models.

#include <gtest/gtest.h>

#include "oracles.h"

namespace ols {
namespace {

class RandomModelGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomModelGradient, ParametersMatchFiniteDifferences) {
  testing::GradientCase c = testing::random_gradient_case(GetParam());
  const testing::GradCheck g =
      testing::check_param_gradients(c.model.net, c.batch, c.targets);
  EXPECT_LT(g.max_rel_error, 1e-4) << c.description << "\n" << g.worst;
}

TEST_P(RandomModelGradient, InputMatchesFiniteDifferences) {
  const testing::GradientCase c = testing::random_gradient_case(GetParam());
  const testing::GradCheck g =
      testing::check_input_gradient(c.model.net, c.batch, c.targets);
  EXPECT_LT(g.max_rel_error, 1e-4) << c.description << "\n" << g.worst;
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomModelGradient,
                         ::testing::Range<std::uint64_t>(1, 25));

}  // namespace
}  // namespace ols
