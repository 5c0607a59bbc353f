// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/metrics_io.h"

#include <cstdio>
#include <fstream>

#include "ols/errors.h"

namespace ols {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

}  // namespace

std::string format_metrics_csv(std::span<const MetricsRecord> records) {
  std::string out =
      "epoch,train_error,test_top1_error,test_top5_error,loss_hard,loss_soft,"
      "wrong_label_fit\n";
  for (const MetricsRecord& r : records) {
    out += std::to_string(r.epoch) + ',' + num(r.train_error) + ',' +
           num(r.test_top1_error) + ',' + opt(r.test_top5_error) + ',' +
           num(r.loss_hard) + ',' + num(r.loss_soft) + ',' +
           opt(r.wrong_label_fit) + '\n';
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const MetricsRecord> records) {
  write_text_file(path, format_metrics_csv(records));
}

std::string format_timing_csv(std::span<const MetricsRecord> records) {
  std::string out = "epoch,seconds\n";
  for (const MetricsRecord& r : records) {
    out += std::to_string(r.epoch) + ',' + num(r.seconds) + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace ols
