// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <benchmark/benchmark.h>

#include "ols/model.h"
#include "ols/network.h"
#include "ols/soft_label_bank.h"
#include "ols/tensor.h"

namespace {

using namespace ols;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

// One training step of the toy MLP [2, 64, 64, 10].
void BM_MlpForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ModelSpec spec;
  spec.widths = {2, 64, 64, 10};
  spec.num_classes = 10;
  Model m = build_model(spec, 3);
  const Tensor x = random_tensor({n, 2}, 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 10);
  const Tensor t = one_hot(y, 10);
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(m.net, x, t).loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(32)->Arg(256);

void BM_SmallCnnForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ModelSpec spec;
  spec.arch = Architecture::kSmallCnn;
  spec.widths = {8, 16, 10};
  spec.input_shape = {3, 32, 32};
  spec.num_classes = 10;
  Model m = build_model(spec, 5);
  const Tensor x = random_tensor({n, 3, 32, 32}, 6);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 10);
  const Tensor t = one_hot(y, 10);
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(m.net, x, t).loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SmallCnnForwardBackward)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BankAccumulate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  SoftLabelBank bank(k);
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  int y = 0;
  for (auto _ : state) {
    bank.accumulate(y, p, y);
    y = (y + 1) % static_cast<int>(k);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BankAccumulate)->Arg(10)->Arg(100);

void BM_BankFinalize(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  SoftLabelBank bank(k);
  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  for (auto _ : state) {
    for (int y = 0; y < static_cast<int>(k); ++y) bank.accumulate(y, p, y);
    bank.finalize();
  }
}
BENCHMARK(BM_BankFinalize)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
