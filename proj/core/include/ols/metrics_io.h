// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "ols/trainer.h"

namespace ols {

// One row per epoch:
//   epoch,train_error,test_top1_error,test_top5_error,loss_hard,loss_soft,
//   wrong_label_fit
// Optional fields are left empty. Wall-clock time is deliberately absent so
// identical runs give identical bytes; see format_timing_csv.
std::string format_metrics_csv(std::span<const MetricsRecord> records);
void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const MetricsRecord> records);

// epoch,seconds
std::string format_timing_csv(std::span<const MetricsRecord> records);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ols
