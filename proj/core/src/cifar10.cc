// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/cifar10.h"

#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ols/errors.h"

namespace ols {
namespace {

constexpr std::size_t kPlane = 32 * 32;

void append(Dataset& into, Dataset&& part) {
  if (into.labels.empty()) {
    into = std::move(part);
    return;
  }
  std::vector<double> values = into.features.values();
  values.insert(values.end(), part.features.values().begin(),
                part.features.values().end());
  into.labels.insert(into.labels.end(), part.labels.begin(), part.labels.end());
  into.clean_labels = into.labels;
  into.features = Tensor({into.labels.size(), 3, 32, 32}, std::move(values));
}

}  // namespace

Dataset load_cifar10_batch(const std::filesystem::path& file, Split split,
                           const CifarOptions& opts) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open CIFAR-10 batch");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.empty()) throw ParseError(file.string(), 0, "empty CIFAR-10 batch");
  if (bytes.size() % kCifarRecordBytes != 0) {
    const std::size_t whole = bytes.size() / kCifarRecordBytes;
    throw ParseError(file.string(), whole * kCifarRecordBytes,
                     "truncated record (file size " + std::to_string(bytes.size()) +
                         " is not a multiple of " +
                         std::to_string(kCifarRecordBytes) + ")");
  }
  std::size_t n = bytes.size() / kCifarRecordBytes;
  if (opts.limit != 0 && opts.limit < n) n = opts.limit;

  Dataset ds;
  ds.num_classes = 10;
  ds.split = split;
  ds.labels.reserve(n);
  std::vector<double> values(n * 3 * kPlane);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t base = r * kCifarRecordBytes;
    const unsigned label = bytes[base];
    if (label > 9) {
      throw DataError(file.string() + " @ offset " + std::to_string(base) +
                      ": label byte " + std::to_string(label) + " > 9");
    }
    ds.labels.push_back(static_cast<int>(label));
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < kPlane; ++p) {
        const double px = bytes[base + 1 + c * kPlane + p] / 255.0;
        values[(r * 3 + c) * kPlane + p] = (px - opts.mean[c]) / opts.stddev[c];
      }
    }
  }
  ds.clean_labels = ds.labels;
  ds.features = Tensor({n, 3, 32, 32}, std::move(values));
  return ds;
}

DatasetPair load_cifar10(const std::filesystem::path& dir,
                         const CifarOptions& opts) {
  DatasetPair out;
  for (int b = 1; b <= 5; ++b) {
    if (opts.limit != 0 && out.train.size() >= opts.limit) break;
    CifarOptions part = opts;
    if (opts.limit != 0) part.limit = opts.limit - out.train.size();
    append(out.train,
           load_cifar10_batch(dir / ("data_batch_" + std::to_string(b) + ".bin"),
                              Split::kTrain, part));
  }
  out.test = load_cifar10_batch(dir / "test_batch.bin", Split::kTest, opts);
  return out;
}

}  // namespace ols
