// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ols/model.h"
#include "ols/soft_label_bank.h"

namespace ols {

// Snapshot of a training run at the end of an epoch.
//
// On-disk layout (all integers and floats little-endian):
//   offset 0   8 bytes  magic "OLSCKPT\0"
//   offset 8   u32      format version (kCheckpointVersion)
//   offset 12  u64      header length H
//   offset 20  H bytes  UTF-8 JSON header: spec, epoch, strategy, rng_state
//                       and the ordered tensor table [{name, shape}, ...]
//   offset 20+H         raw f64 values of every tensor, in table order
// Soft-label bank tensors, when present, follow the parameters under the
// names bank.supervision, bank.accumulator and bank.counts.
struct Checkpoint {
  ModelSpec spec;
  std::vector<std::pair<std::string, Tensor>> params;
  int epoch = 0;
  std::string strategy;
  std::optional<SoftLabelBank> bank;
  std::string rng_state;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint make_checkpoint(const Model& model, int epoch);

// Rebuilds the network described by the checkpoint and copies its values.
Model restore_model(const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws ParseError (with byte offset) on malformed or truncated input and
// VersionError on an unsupported format version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

}  // namespace ols
