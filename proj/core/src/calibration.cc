// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/calibration.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <vector>

#include "ols/errors.h"
#include "ols/network.h"

namespace ols {
namespace {

double bin_edge(std::size_t m, std::size_t bins) {
  return static_cast<double>(m) / static_cast<double>(bins);
}

// Bin m holds confidences in (edge(m), edge(m + 1)]; the first bin also
// takes a confidence of exactly 0.
std::size_t bin_of(double conf, std::size_t bins) {
  auto m = static_cast<std::ptrdiff_t>(std::ceil(conf * static_cast<double>(bins))) - 1;
  m = std::clamp<std::ptrdiff_t>(m, 0, static_cast<std::ptrdiff_t>(bins) - 1);
  auto mu = static_cast<std::size_t>(m);
  while (mu > 0 && conf <= bin_edge(mu, bins)) --mu;
  while (mu + 1 < bins && conf > bin_edge(mu + 1, bins)) ++mu;
  return mu;
}

}  // namespace

double ece(const Tensor& probs, std::span<const int> labels, std::size_t bins) {
  if (bins == 0) throw ParameterError("ece needs at least one bin");
  if (labels.empty()) throw DataError("ece of an empty prediction set");
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw DimensionError("ece: probabilities " + to_string(probs.shape()) +
                         " vs " + std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> count(bins, 0), correct(bins, 0);
  std::vector<double> conf_sum(bins, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(i);
    const std::size_t pred = argmax(row);
    const double conf = row[pred];
    const std::size_t m = bin_of(conf, bins);
    ++count[m];
    conf_sum[m] += conf;
    if (static_cast<int>(pred) == labels[i]) ++correct[m];
  }
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t m = 0; m < bins; ++m) {
    if (count[m] == 0) continue;
    const double c = static_cast<double>(count[m]);
    const double acc = static_cast<double>(correct[m]) / c;
    const double conf = conf_sum[m] / c;
    total += (c / n) * std::abs(acc - conf);
  }
  return 100.0 * total;
}

Tensor load_reference_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open reference file");
  std::vector<double> values;
  std::size_t k = 0, rows = 0;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::uint64_t row_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ParseError(path.string(), row_offset + (p - line.data()),
                         "expected a probability");
      }
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') {
        throw ParseError(path.string(), row_offset + (next - line.data()),
                         "expected ','");
      }
      p = next + 1;
    }
    if (k == 0) k = row.size();
    if (row.size() != k) {
      throw ParseError(path.string(), row_offset,
                       "row has " + std::to_string(row.size()) +
                           " columns, expected " + std::to_string(k));
    }
    double total = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) {
        throw DataError(path.string() + ": negative probability in row " +
                        std::to_string(rows));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw DataError(path.string() + ": row " + std::to_string(rows) +
                      " sums to " + std::to_string(total));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string(), 0, "no reference rows");
  return Tensor({rows, k}, std::move(values));
}

double kl_to_reference(const Tensor& probs, const Tensor& refs,
                       std::span<const int> labels, bool only_correct) {
  if (probs.rank() != 2 || refs.shape() != probs.shape()) {
    throw DimensionError("kl_to_reference: model " + to_string(probs.shape()) +
                         " vs reference " + to_string(refs.shape()));
  }
  if (labels.size() != probs.dim(0)) {
    throw DimensionError("kl_to_reference: label count mismatch");
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto p = probs.row(i);
    if (only_correct && static_cast<int>(argmax(p)) != labels[i]) continue;
    const auto r = refs.row(i);
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (r[c] > 0.0) kl += r[c] * (std::log(r[c]) - std::log(std::max(p[c], kLogFloor)));
    }
    total += kl;
    ++used;
  }
  if (used == 0) throw DataError("kl_to_reference: no samples to average");
  return total / static_cast<double>(used);
}

}  // namespace ols
