// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ols/attack.h"
#include "ols/cifar10.h"
#include "ols/synthetic.h"
#include "ols/trainer.h"

namespace ols::lab {

enum class DataSource { kSynthetic, kCifar10, kCsv };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  SyntheticSpec synthetic;
  std::filesystem::path cifar_dir;
  CifarOptions cifar;
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::size_t num_classes = 0;  // csv only; derived for the other sources

  std::size_t classes() const;
};

// A family of attacks sharing everything but the radius.
struct AttackSweep {
  AttackMethod method = AttackMethod::kFgsm;
  std::vector<double> epsilons;
  bool pixel_units = false;  // epsilons given on the 0-255 scale
  int iterations = 20;       // pgd
  double step_fraction = 0.25;
  bool random_start = true;  // pgd
  std::uint64_t seed = 0;
  std::optional<double> lo;
  std::optional<double> hi;

  AttackConfig at(double epsilon) const;
};

struct EvalConfig {
  bool ece = false;
  std::size_t ece_bins = 15;
  std::optional<std::filesystem::path> kl_reference;
  bool kl_only_correct = true;
  std::optional<AttackSweep> attack;
};

struct EnsembleConfig {
  std::string checkpoints;  // glob
  std::vector<std::size_t> sizes = {1};
};

struct SweepAxes {
  std::vector<double> alpha;
  std::vector<std::size_t> update_period;  // 0 = one epoch
  std::vector<double> noise_rate;
  std::vector<std::uint64_t> seed;  // sets init, shuffle and noise seeds

  bool empty() const {
    return alpha.empty() && update_period.empty() && noise_rate.empty() &&
           seed.empty();
  }
};

struct ExperimentConfig {
  DataConfig data;
  TrainConfig train;
  EvalConfig eval;
  EnsembleConfig ensemble;
  SweepAxes sweep;
  std::string checkpoint;  // eval and attack input
};

// Throws ConfigError naming every missing, unknown or ill-typed key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Every field with defaults filled in.
nlohmann::json to_json(const ExperimentConfig& cfg);

// 16 hex digits of FNV-1a 64 over the compact dump of `resolved`, with
// output_dir left out so a run keeps its id when moved.
std::string run_id(const nlohmann::json& resolved);

DatasetPair load_data(const DataConfig& cfg);

// Fills model.num_classes and an empty model.input_shape from the data.
void resolve_model(ExperimentConfig& cfg, const DatasetPair& data);

}  // namespace ols::lab
