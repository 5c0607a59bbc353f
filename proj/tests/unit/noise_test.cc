// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/noise.h"

#include <gtest/gtest.h>

#include "ols/errors.h"
#include "ols/synthetic.h"

namespace ols {
namespace {

Dataset ring(std::size_t per_class) {
  SyntheticSpec spec;
  spec.train_per_class = per_class;
  spec.test_per_class = 1;
  return make_synthetic(spec).train;
}

std::size_t flipped(const Dataset& ds) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) n += ds.labels[i] != ds.clean_labels[i];
  return n;
}

TEST(NoiseTest, ExactFlipCount) {
  const Dataset clean = ring(100);
  const Dataset noisy = inject_symmetric_noise(clean, {0.4, 1});
  EXPECT_EQ(flipped(noisy), 400u);
  EXPECT_EQ(noisy.clean_labels, clean.clean_labels);
  EXPECT_EQ(noisy.features, clean.features);
  EXPECT_DOUBLE_EQ(noisy.noise_rate(), 0.4);
}

TEST(NoiseTest, CountRoundsToNearest) {
  const Dataset clean = ring(1);  // n = 10
  EXPECT_EQ(flipped(inject_symmetric_noise(clean, {0.25, 3})), 3u);
  EXPECT_EQ(flipped(inject_symmetric_noise(clean, {0.04, 3})), 0u);
}

TEST(NoiseTest, ZeroAndFullRate) {
  const Dataset clean = ring(50);
  EXPECT_EQ(inject_symmetric_noise(clean, {0.0, 5}).labels, clean.labels);
  EXPECT_EQ(flipped(inject_symmetric_noise(clean, {1.0, 5})), clean.size());
}

TEST(NoiseTest, Deterministic) {
  const Dataset clean = ring(50);
  EXPECT_EQ(inject_symmetric_noise(clean, {0.3, 8}).labels,
            inject_symmetric_noise(clean, {0.3, 8}).labels);
  EXPECT_NE(inject_symmetric_noise(clean, {0.3, 8}).labels,
            inject_symmetric_noise(clean, {0.3, 9}).labels);
}

// New labels should be uniform over the K - 1 wrong classes. Chi-square on
// the offset (new - clean) mod K, 8 degrees of freedom; 26.12 is the 0.999
// quantile.
TEST(NoiseTest, WrongLabelsAreUniform) {
  const Dataset clean = ring(500);
  const Dataset noisy = inject_symmetric_noise(clean, {1.0, 11});
  std::vector<double> count(10, 0.0);
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    count[static_cast<std::size_t>((noisy.labels[i] - noisy.clean_labels[i] + 10) % 10)] += 1;
  }
  EXPECT_EQ(count[0], 0.0);
  const double expected = static_cast<double>(noisy.size()) / 9.0;
  double chi2 = 0.0;
  for (std::size_t c = 1; c < 10; ++c) {
    chi2 += (count[c] - expected) * (count[c] - expected) / expected;
  }
  EXPECT_LT(chi2, 26.12);
}

TEST(NoiseTest, RejectsBadRate) {
  const Dataset clean = ring(2);
  EXPECT_THROW(inject_symmetric_noise(clean, {1.5, 0}), ParameterError);
  EXPECT_THROW(inject_symmetric_noise(clean, {-0.1, 0}), ParameterError);
}

}  // namespace
}  // namespace ols
