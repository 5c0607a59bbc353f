// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ols/network.h"

namespace ols {

enum class Architecture { kMlp, kSmallCnn };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& tag);

// Small classifier description.
//
//   mlp        widths = [input_dim, hidden..., K]; Linear layers with ReLU
//              between them. input_shape defaults to [widths.front()].
//   small_cnn  widths = [conv_channels..., K]; each conv block is a 3x3
//              stride-1 zero-padded convolution, ReLU and 2x2 max-pool,
//              followed by flatten and one Linear layer to K.
//              input_shape = [C, H, W].
struct ModelSpec {
  Architecture arch = Architecture::kMlp;
  std::vector<std::size_t> widths;
  Shape input_shape;
  std::size_t num_classes = 0;

  // Throws ConfigError on an inconsistent description.
  void validate() const;
  Shape resolved_input_shape() const;

  bool operator==(const ModelSpec&) const = default;
};

struct Model {
  ModelSpec spec;
  Network net;
};

// Kaiming-uniform fan-in weights (bound sqrt(6 / fan_in)) and zero biases,
// drawn from a generator seeded with `seed`. Pure function of (spec, seed).
Model build_model(const ModelSpec& spec, std::uint64_t seed);

}  // namespace ols
