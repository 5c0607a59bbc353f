// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>

#include "ols/dataset.h"

namespace ols {

// CIFAR-10 binary batches: records of 1 label byte followed by 3072 pixel
// bytes (32x32 red plane, then green, then blue).
struct CifarOptions {
  // Per-channel normalization applied after scaling pixels to [0, 1].
  std::array<double, 3> mean = {0.4914, 0.4822, 0.4465};
  std::array<double, 3> stddev = {0.2470, 0.2435, 0.2616};
  // Keep at most this many records per split; 0 keeps everything.
  std::size_t limit = 0;
};

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarRecordsPerBatch = 10000;

// Parses one batch file into [n x 3 x 32 x 32] features.
Dataset load_cifar10_batch(const std::filesystem::path& file, Split split,
                           const CifarOptions& opts = {});

// data_batch_1.bin ... data_batch_5.bin and test_batch.bin from `dir`.
DatasetPair load_cifar10(const std::filesystem::path& dir,
                         const CifarOptions& opts = {});

}  // namespace ols
