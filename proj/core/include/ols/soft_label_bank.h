// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "ols/targets.h"
#include "ols/tensor.h"

namespace ols {

// Class-level soft labels learned online from correct predictions.
//
// Two K x K matrices are kept, both indexed (k, y): column y belongs to
// class y.
//   supervision  normalized labels from the last finalized period; every
//                column is a distribution. Targets are read from here only.
//   accumulator  running sums of the softmax outputs of correctly classified
//                samples seen since the last finalize; column y sums to
//                counts()[y].
// finalize() normalizes each accumulated column into the supervision matrix
// and clears the accumulator. A class with no correct prediction in the
// period keeps its previous supervision column, so an untouched bank stays
// uniform.
class SoftLabelBank {
 public:
  // Uniform supervision columns, empty accumulator. Requires K >= 2.
  explicit SoftLabelBank(std::size_t num_classes);

  // Restores a saved state; validates column sums and non-negativity.
  SoftLabelBank(Tensor supervision, Tensor accumulator,
                std::vector<std::uint64_t> counts);

  std::size_t num_classes() const { return k_; }

  // Column y of the supervision matrix (a copy).
  TargetDistribution target(int y) const;

  // Adds `probs` to accumulator column y when predicted == y.
  void accumulate(int y, std::span<const double> probs, int predicted);

  void finalize();

  const Tensor& supervision() const { return s_prev_; }
  const Tensor& accumulator() const { return s_accum_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  // K rows x K columns, column y = soft label of class y.
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::size_t k_;
  Tensor s_prev_;
  Tensor s_accum_;
  std::vector<std::uint64_t> counts_;
};

// Per-class stores of individual softmax outputs for the OLS-Single variant.
// Predictions recorded during one period become drawable after rotate(); each
// class keeps at most `capacity[y]` entries, overwriting its oldest.
class SamplePredictionPool {
 public:
  SamplePredictionPool(std::size_t num_classes,
                       std::vector<std::size_t> capacity);

  void record(int y, std::span<const double> probs);

  // Makes the recorded predictions the drawable pool and starts a new period.
  void rotate();

  std::size_t pool_size(int y) const;

  // A uniformly drawn stored prediction of class y; uniform 1/K when the
  // pool of y is empty.
  TargetDistribution draw(int y, std::mt19937_64& rng) const;

 private:
  struct Ring {
    std::size_t capacity = 0;
    std::size_t next = 0;
    std::vector<std::vector<double>> items;
  };

  std::size_t k_;
  std::vector<Ring> current_;
  std::vector<Ring> previous_;
};

}  // namespace ols
