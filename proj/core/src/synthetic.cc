// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/synthetic.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ols/errors.h"

namespace ols {
namespace {

Dataset draw(const std::vector<std::vector<double>>& means, std::size_t per_class,
             std::size_t dim, Split split, std::mt19937_64& rng) {
  const std::size_t k = means.size();
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset ds;
  ds.num_classes = k;
  ds.split = split;
  std::vector<double> values;
  values.reserve(k * per_class * dim);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j) values.push_back(means[c][j] + noise(rng));
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.clean_labels = ds.labels;
  ds.features = Tensor({k * per_class, dim}, std::move(values));
  return ds;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic data needs K >= 2");
  if (train_per_class < 1) throw ConfigError("train_per_class must be >= 1");
  if (dim < 2) throw ConfigError("synthetic dim must be >= 2");
  if (layout == MeanLayout::kRing && !(radius > 0.0)) {
    throw ConfigError("ring radius must be positive");
  }
  if (layout == MeanLayout::kCustom) {
    if (means.size() != num_classes) {
      throw ConfigError("custom layout needs one mean per class");
    }
    for (const auto& m : means) {
      if (m.size() != dim) throw ConfigError("custom mean has wrong dimension");
    }
  }
}

std::vector<std::vector<double>> class_means(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.layout == MeanLayout::kCustom) return spec.means;
  std::vector<std::vector<double>> means(spec.num_classes,
                                         std::vector<double>(spec.dim, 0.0));
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(spec.num_classes);
    means[c][0] = spec.radius * std::cos(angle);
    means[c][1] = spec.radius * std::sin(angle);
  }
  return means;
}

DatasetPair make_synthetic(const SyntheticSpec& spec) {
  const auto means = class_means(spec);
  std::mt19937_64 rng(spec.seed);
  DatasetPair out;
  out.train = draw(means, spec.train_per_class, spec.dim, Split::kTrain, rng);
  out.test = draw(means, spec.test_per_class, spec.dim, Split::kTest, rng);
  return out;
}

}  // namespace ols
