// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/model.h"

#include <cmath>
#include <random>

#include "ols/errors.h"

namespace ols {

std::string to_string(Architecture arch) {
  return arch == Architecture::kMlp ? "mlp" : "small_cnn";
}

Architecture parse_architecture(const std::string& tag) {
  if (tag == "mlp") return Architecture::kMlp;
  if (tag == "small_cnn") return Architecture::kSmallCnn;
  throw ConfigError("unknown architecture '" + tag +
                    "' (expected mlp or small_cnn)");
}

Shape ModelSpec::resolved_input_shape() const {
  if (!input_shape.empty()) return input_shape;
  if (arch == Architecture::kMlp && !widths.empty()) return {widths.front()};
  return {};
}

void ModelSpec::validate() const {
  if (num_classes < 2) throw ConfigError("model needs at least 2 classes");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("model widths must be positive");
  }
  if (widths.empty() || widths.back() != num_classes) {
    throw ConfigError("final model width must equal the class count " +
                      std::to_string(num_classes));
  }
  const Shape in = resolved_input_shape();
  if (arch == Architecture::kMlp) {
    if (widths.size() < 2) {
      throw ConfigError("mlp widths need at least [input, classes]");
    }
    if (in.size() != 1 || in[0] != widths.front()) {
      throw ConfigError("mlp input_shape must be [" +
                        std::to_string(widths.front()) + "]");
    }
  } else {
    if (in.size() != 3) throw ConfigError("small_cnn input_shape must be [C, H, W]");
    std::size_t h = in[1], w = in[2];
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      h /= 2;
      w /= 2;
      if (h == 0 || w == 0) {
        throw ConfigError("small_cnn has more pooling stages than the input allows");
      }
    }
  }
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Model model{spec, Network(spec.resolved_input_shape())};
  Network& net = model.net;
  if (spec.arch == Architecture::kMlp) {
    for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
      if (i) net.add_relu();
      net.add_linear(spec.widths[i], spec.widths[i + 1]);
    }
  } else {
    const Shape in = spec.resolved_input_shape();
    std::size_t channels = in[0], h = in[1], w = in[2];
    for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
      net.add_conv2d(channels, spec.widths[i], 3, 1);
      net.add_relu();
      net.add_maxpool2();
      channels = spec.widths[i];
      h /= 2;
      w /= 2;
    }
    net.add_flatten();
    net.add_linear(channels * h * w, spec.num_classes);
  }

  std::mt19937_64 rng(seed);
  for (Param& p : net.params()) {
    if (p.value.rank() == 1) continue;  // bias stays zero
    const std::size_t fan_in = p.value.row_size();
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : p.value.data()) v = dist(rng);
  }
  return model;
}

}  // namespace ols
