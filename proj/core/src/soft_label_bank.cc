// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/soft_label_bank.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ols/errors.h"

namespace ols {
namespace {

void check_class(int y, std::size_t k) {
  if (y < 0 || static_cast<std::size_t>(y) >= k) {
    throw IndexError("class index " + std::to_string(y) + " outside [0, " +
                     std::to_string(k) + ")");
  }
}

}  // namespace

SoftLabelBank::SoftLabelBank(std::size_t num_classes)
    : k_(num_classes),
      s_prev_({num_classes, num_classes},
              num_classes ? 1.0 / static_cast<double>(num_classes) : 0.0),
      s_accum_({num_classes, num_classes}),
      counts_(num_classes, 0) {
  if (num_classes < 2) throw ParameterError("soft label bank needs K >= 2");
}

SoftLabelBank::SoftLabelBank(Tensor supervision, Tensor accumulator,
                             std::vector<std::uint64_t> counts)
    : k_(counts.size()),
      s_prev_(std::move(supervision)),
      s_accum_(std::move(accumulator)),
      counts_(std::move(counts)) {
  if (k_ < 2) throw ParameterError("soft label bank needs K >= 2");
  const Shape square{k_, k_};
  if (s_prev_.shape() != square || s_accum_.shape() != square) {
    throw DimensionError("soft label bank matrices must be " + to_string(square));
  }
  for (std::size_t y = 0; y < k_; ++y) {
    double total = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
      if (!(s_prev_.at(k, y) >= 0.0) || !(s_accum_.at(k, y) >= 0.0)) {
        throw DataError("soft label bank holds a negative entry");
      }
      total += s_prev_.at(k, y);
    }
    if (std::abs(total - 1.0) > TargetDistribution::kSumTolerance) {
      throw DataError("soft label column " + std::to_string(y) +
                      " does not sum to 1");
    }
  }
}

TargetDistribution SoftLabelBank::target(int y) const {
  check_class(y, k_);
  std::vector<double> col(k_);
  for (std::size_t k = 0; k < k_; ++k) {
    col[k] = s_prev_.at(k, static_cast<std::size_t>(y));
  }
  return TargetDistribution(std::move(col));
}

void SoftLabelBank::accumulate(int y, std::span<const double> probs,
                               int predicted) {
  check_class(y, k_);
  if (probs.size() != k_) {
    throw DimensionError("accumulate expects " + std::to_string(k_) +
                         " probabilities, got " + std::to_string(probs.size()));
  }
  if (predicted != y) return;
  const auto col = static_cast<std::size_t>(y);
  for (std::size_t k = 0; k < k_; ++k) s_accum_.at(k, col) += probs[k];
  ++counts_[col];
}

void SoftLabelBank::finalize() {
  for (std::size_t y = 0; y < k_; ++y) {
    if (counts_[y] == 0) continue;
    double total = 0.0;
    for (std::size_t k = 0; k < k_; ++k) total += s_accum_.at(k, y);
    for (std::size_t k = 0; k < k_; ++k) {
      s_prev_.at(k, y) = s_accum_.at(k, y) / total;
    }
  }
  s_accum_.fill(0.0);
  std::fill(counts_.begin(), counts_.end(), 0);
}

void SoftLabelBank::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  for (std::size_t k = 0; k < k_; ++k) {
    for (std::size_t y = 0; y < k_; ++y) {
      std::snprintf(buf, sizeof(buf), "%.17g", s_prev_.at(k, y));
      if (y) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

SamplePredictionPool::SamplePredictionPool(std::size_t num_classes,
                                           std::vector<std::size_t> capacity)
    : k_(num_classes), current_(num_classes), previous_(num_classes) {
  if (capacity.size() != num_classes) {
    throw DimensionError("one pool capacity per class required");
  }
  for (std::size_t y = 0; y < num_classes; ++y) {
    current_[y].capacity = capacity[y];
    previous_[y].capacity = capacity[y];
  }
}

void SamplePredictionPool::record(int y, std::span<const double> probs) {
  check_class(y, k_);
  Ring& ring = current_[static_cast<std::size_t>(y)];
  if (ring.capacity == 0) return;
  std::vector<double> item(probs.begin(), probs.end());
  if (ring.items.size() < ring.capacity) {
    ring.items.push_back(std::move(item));
  } else {
    ring.items[ring.next] = std::move(item);
  }
  ring.next = (ring.next + 1) % ring.capacity;
}

void SamplePredictionPool::rotate() {
  for (std::size_t y = 0; y < k_; ++y) {
    previous_[y] = std::move(current_[y]);
    current_[y] = Ring{};
    current_[y].capacity = previous_[y].capacity;
  }
}

std::size_t SamplePredictionPool::pool_size(int y) const {
  check_class(y, k_);
  return previous_[static_cast<std::size_t>(y)].items.size();
}

TargetDistribution SamplePredictionPool::draw(int y, std::mt19937_64& rng) const {
  check_class(y, k_);
  const Ring& ring = previous_[static_cast<std::size_t>(y)];
  if (ring.items.empty()) return TargetDistribution::uniform(k_);
  std::uniform_int_distribution<std::size_t> pick(0, ring.items.size() - 1);
  return TargetDistribution(ring.items[pick(rng)]);
}

}  // namespace ols
