// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "ols/tensor.h"

namespace ols {

inline constexpr std::size_t kDefaultEceBins = 15;

// Expected calibration error in percent. Samples are binned by confidence
// max_k p_k into `bins` equal-width intervals (m/M, (m+1)/M]; each bin adds
// |B|/n * |accuracy(B) - mean confidence(B)|. Predictions use the
// lowest-index argmax.
double ece(const Tensor& probs, std::span<const int> labels,
           std::size_t bins = kDefaultEceBins);

// Per-sample reference distributions (for example human label votes).
// CSV: one row per sample, K probability columns, no header; every row sums
// to 1 within 1e-6.
Tensor load_reference_csv(const std::filesystem::path& path);

// Mean KL(reference || model) with model probabilities floored at 1e-12.
// With only_correct, samples the model misclassifies are skipped, and an
// empty remainder is a DataError.
double kl_to_reference(const Tensor& probs, const Tensor& refs,
                       std::span<const int> labels, bool only_correct);

}  // namespace ols
