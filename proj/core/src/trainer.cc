// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ols/checkpoint.h"
#include "ols/errors.h"
#include "ols/noise.h"

namespace ols {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

constexpr std::uint64_t kSingleDrawStream = 0x5eed'0000'0001ULL;

std::string epoch_file(const char* prefix, int epoch, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04d%s", prefix, epoch, ext);
  return buf;
}

// Targets of one batch under the configured strategy (before mixing in the
// hard-label weight).
Tensor strategy_targets(const LabelStrategy& s, const Batch& batch,
                        const Tensor& probs, const SoftLabelBank* bank,
                        const SamplePredictionPool* pool, std::mt19937_64& rng) {
  const std::size_t n = batch.labels.size();
  const std::size_t k = probs.dim(1);
  Tensor t({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    const int y = batch.labels[i];
    const auto p = probs.row(i);
    TargetDistribution d = std::visit(
        [&](const auto& v) -> TargetDistribution {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, strategy::Hard>) {
            return hard_target(y, k);
          } else if constexpr (std::is_same_v<T, strategy::UniformLS>) {
            return uniform_ls_target(y, k, v.epsilon);
          } else if constexpr (std::is_same_v<T, strategy::TfKD>) {
            return tfkd_target(y, k, v.a);
          } else if constexpr (std::is_same_v<T, strategy::BootstrapSoft>) {
            return bootstrap_target(y, p, v.beta, BootstrapMode::kSoft);
          } else if constexpr (std::is_same_v<T, strategy::BootstrapHard>) {
            return bootstrap_target(y, p, v.beta, BootstrapMode::kHard);
          } else if constexpr (std::is_same_v<T, strategy::OLS>) {
            return bank->target(y);
          } else {
            return pool->draw(y, rng);
          }
        },
        s);
    auto row = t.row(i);
    std::copy(d.probs().begin(), d.probs().end(), row.begin());
  }
  return t;
}

double wrong_label_fit(const Tensor& probs, const Dataset& train) {
  std::size_t corrupted = 0, fit = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.labels[i] == train.clean_labels[i]) continue;
    ++corrupted;
    if (static_cast<int>(argmax(probs.row(i))) == train.labels[i]) ++fit;
  }
  if (corrupted == 0) return 0.0;
  return 100.0 * static_cast<double>(fit) / static_cast<double>(corrupted);
}

}  // namespace

std::uint64_t epoch_shuffle_seed(std::uint64_t shuffle_seed, int epoch) {
  return mix_seed(shuffle_seed, static_cast<std::uint64_t>(epoch));
}

void TrainConfig::validate() const {
  model.validate();
  sgd.validate();
  ols::validate(strategy);
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw ConfigError("noise rate must lie in [0, 1]");
  }
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if ((checkpoint_every > 0 || dump_soft_labels) && output_dir.empty()) {
    throw ConfigError("checkpoints and soft-label dumps need an output directory");
  }
}

Tensor predict_all(const Network& net, const Tensor& features,
                   std::size_t batch_size) {
  const std::size_t n = features.dim(0);
  Tensor probs;
  std::vector<double> values;
  std::size_t k = 0;
  Shape chunk_shape = features.shape();
  const std::size_t w = features.row_size();
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t m = std::min(batch_size, n - start);
    chunk_shape[0] = m;
    std::vector<double> chunk(features.values().begin() + start * w,
                              features.values().begin() + (start + m) * w);
    const Tensor p = net.predict_proba(Tensor(chunk_shape, std::move(chunk)));
    k = p.dim(1);
    values.insert(values.end(), p.values().begin(), p.values().end());
  }
  return Tensor({n, k}, std::move(values));
}

double topk_error(const Tensor& probs, std::span<const int> labels,
                  std::size_t k) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw DimensionError("topk_error: probabilities " + to_string(probs.shape()) +
                         " vs " + std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) return 0.0;
  std::size_t misses = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(i);
    const auto y = static_cast<std::size_t>(labels[i]);
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] > row[y] || (row[c] == row[y] && c < y)) ++ahead;
    }
    if (ahead >= k) ++misses;
  }
  return 100.0 * static_cast<double>(misses) / static_cast<double>(labels.size());
}

EvalResult evaluate(const Network& net, const Dataset& ds,
                    std::size_t batch_size) {
  EvalResult r;
  r.probs = predict_all(net, ds.features, batch_size);
  r.top1_error = topk_error(r.probs, ds.labels, 1);
  if (ds.num_classes >= 5) r.top5_error = topk_error(r.probs, ds.labels, 5);
  return r;
}

FitResult fit(const TrainConfig& cfg, const Dataset& train_in,
              const Dataset& test, const FitHooks& hooks) {
  cfg.validate();
  train_in.validate();
  test.validate();
  const std::size_t k = cfg.model.num_classes;
  if (train_in.num_classes != k || test.num_classes != k) {
    throw ConfigError("dataset class count does not match the model");
  }

  FitResult result;
  result.train = cfg.noise_rate > 0.0
                     ? inject_symmetric_noise(train_in, {cfg.noise_rate, cfg.seeds.noise})
                     : train_in;
  const Dataset& train = result.train;
  const bool noisy = train.noise_rate() > 0.0;

  result.model = build_model(cfg.model, cfg.seeds.init);
  Network& net = result.model.net;

  const double alpha = hard_weight(cfg.strategy);
  const bool ols = std::holds_alternative<strategy::OLS>(cfg.strategy);
  const bool single = std::holds_alternative<strategy::OLSSingle>(cfg.strategy);
  std::optional<SoftLabelBank> bank;
  std::optional<SamplePredictionPool> pool;
  if (ols) bank.emplace(k);
  if (single) pool.emplace(k, train.class_counts());
  std::mt19937_64 draw_rng(mix_seed(cfg.seeds.shuffle, kSingleDrawStream));

  const std::size_t per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t period = cfg.update_period ? cfg.update_period : per_epoch;

  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  if (cfg.checkpoint_every > 0) {
    std::filesystem::create_directories(cfg.output_dir / "checkpoints");
  }

  std::int64_t iteration = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const BatchPlan plan =
        batches(train, cfg.batch_size,
                epoch_shuffle_seed(cfg.seeds.shuffle, epoch));
    double sum_hard = 0.0, sum_soft = 0.0;

    for (std::size_t b = 0; b < plan.size(); ++b) {
      const Batch batch = gather(train, plan.indices(b));
      const std::size_t n = batch.labels.size();
      const ForwardPass pass = net.forward(batch.features);
      const Tensor probs = pass.probs();

      const Tensor soft = strategy_targets(cfg.strategy, batch, probs,
                                           bank ? &*bank : nullptr,
                                           pool ? &*pool : nullptr, draw_rng);
      Tensor mixed({n, k});
      double batch_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const int y = batch.labels[i];
        const TargetDistribution t(
            std::vector<double>(soft.row(i).begin(), soft.row(i).end()));
        const CombinedLoss loss = combined_loss(probs.row(i), y, t, alpha);
        sum_hard += loss.hard;
        sum_soft += loss.soft;
        batch_total += loss.total;
        for (std::size_t c = 0; c < k; ++c) {
          const double hard = c == static_cast<std::size_t>(y) ? 1.0 : 0.0;
          mixed.at(i, c) = alpha * hard + (1.0 - alpha) * soft.at(i, c);
        }
      }
      ++iteration;
      if (!std::isfinite(batch_total)) {
        throw DivergenceError(epoch, iteration,
                              "non-finite loss at epoch " + std::to_string(epoch) +
                                  ", iteration " + std::to_string(iteration));
      }

      net.params().zero_grad();
      net.backward(pass, soft_ce_logits_gradient(probs, mixed));
      sgd_step(net.params(), cfg.sgd, epoch);

      for (std::size_t i = 0; i < n; ++i) {
        const auto p = probs.row(i);
        if (bank) bank->accumulate(batch.labels[i], p, static_cast<int>(argmax(p)));
        if (pool) pool->record(batch.labels[i], p);
      }

      if (hooks.on_iteration) {
        IterationView view;
        view.epoch = epoch;
        view.iteration = iteration;
        view.batch = &batch;
        view.soft_targets = &soft;
        view.probs = &probs;
        view.bank = bank ? &*bank : nullptr;
        hooks.on_iteration(view);
      }

      if (static_cast<std::size_t>(iteration) % period == 0) {
        if (bank) bank->finalize();
        if (pool) pool->rotate();
      }
    }

    MetricsRecord rec;
    rec.epoch = epoch;
    const Tensor train_probs = predict_all(net, train.features);
    rec.train_error = topk_error(train_probs, train.labels, 1);
    const EvalResult te = evaluate(net, test);
    rec.test_top1_error = te.top1_error;
    rec.test_top5_error = te.top5_error;
    rec.loss_hard = sum_hard / static_cast<double>(train.size());
    rec.loss_soft = sum_soft / static_cast<double>(train.size());
    if (noisy) rec.wrong_label_fit = wrong_label_fit(train_probs, train);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.metrics.push_back(rec);

    if (cfg.dump_soft_labels && bank) {
      bank->write_csv(cfg.output_dir /
                      ("soft_labels_epoch_" + std::to_string(epoch) + ".csv"));
    }
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      Checkpoint ckpt = make_checkpoint(result.model, epoch);
      ckpt.strategy = strategy_name(cfg.strategy);
      ckpt.bank = bank;
      std::ostringstream rng_state;
      rng_state << draw_rng;
      ckpt.rng_state = rng_state.str();
      const auto path =
          cfg.output_dir / "checkpoints" / epoch_file("epoch_", epoch, ".ckpt");
      save_checkpoint(path, ckpt);
      result.checkpoints.push_back(path);
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, result.model);
  }
  result.bank = std::move(bank);
  return result;
}

}  // namespace ols
