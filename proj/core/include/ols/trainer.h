// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ols/dataset.h"
#include "ols/model.h"
#include "ols/sgd.h"
#include "ols/soft_label_bank.h"
#include "ols/targets.h"

namespace ols {

// Every random choice of a run derives from one of these.
struct Seeds {
  std::uint64_t init = 0;     // parameter initialization
  std::uint64_t shuffle = 0;  // batch order, OLS-Single draws
  std::uint64_t noise = 0;    // label corruption
};

// Seed of the batch order of `epoch` (1-based).
std::uint64_t epoch_shuffle_seed(std::uint64_t shuffle_seed, int epoch);

struct TrainConfig {
  ModelSpec model;
  SgdConfig sgd;
  int epochs = 1;
  std::size_t batch_size = 64;
  LabelStrategy strategy = strategy::Hard{};
  // Iterations between soft-label finalizations; 0 means one epoch.
  std::size_t update_period = 0;
  // Fraction of training labels corrupted before training (symmetric).
  double noise_rate = 0.0;
  Seeds seeds;
  // Save a checkpoint every this many epochs (0 disables). Needs output_dir.
  int checkpoint_every = 0;
  std::filesystem::path output_dir;
  // Write soft_labels_epoch_<t>.csv into output_dir after every epoch.
  bool dump_soft_labels = false;

  void validate() const;
};

struct MetricsRecord {
  int epoch = 0;
  double train_error = 0.0;  // top-1 %, against the training labels
  double test_top1_error = 0.0;
  std::optional<double> test_top5_error;  // K >= 5 only
  double loss_hard = 0.0;                 // epoch means over samples
  double loss_soft = 0.0;
  // % of corrupted training samples predicted as their wrong label; present
  // on noisy runs only.
  std::optional<double> wrong_label_fit;
  double seconds = 0.0;  // wall clock, not part of the deterministic record
};

// Read-mostly view handed to FitHooks::on_iteration after the parameter
// update and soft-label accumulation of one iteration, before any finalize.
struct IterationView {
  int epoch = 0;
  std::int64_t iteration = 0;  // 1-based, global
  const Batch* batch = nullptr;
  const Tensor* soft_targets = nullptr;  // [n x K] targets of this iteration
  const Tensor* probs = nullptr;         // pre-update softmax outputs
  SoftLabelBank* bank = nullptr;         // OLS runs only
};

struct FitHooks {
  std::function<void(const IterationView&)> on_iteration;
  std::function<void(int epoch, const Model& model)> on_epoch_end;
};

struct FitResult {
  Model model;
  std::vector<MetricsRecord> metrics;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<SoftLabelBank> bank;
  Dataset train;  // training set as used, after label corruption
};

// Runs the epoch loop. For t = 1..T: shuffled batches; per-sample targets
// from the strategy (OLS reads the soft-label bank finalized before the
// current period); combined loss; backward; SGD step; accumulation of the
// pre-update predictions; finalize every update_period iterations. Throws
// DivergenceError on a non-finite loss.
FitResult fit(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
              const FitHooks& hooks = {});

struct EvalResult {
  double top1_error = 0.0;
  std::optional<double> top5_error;  // K >= 5 only
  Tensor probs;                      // [n x K]
};

EvalResult evaluate(const Network& net, const Dataset& ds,
                    std::size_t batch_size = 256);

// 100 * fraction of rows whose label is not among the k most probable
// classes; ties rank the lower class index first.
double topk_error(const Tensor& probs, std::span<const int> labels, std::size_t k);

// Softmax outputs for all samples, computed in chunks.
Tensor predict_all(const Network& net, const Tensor& features,
                   std::size_t batch_size = 256);

}  // namespace ols
