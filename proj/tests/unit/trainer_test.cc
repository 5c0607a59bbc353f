// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/trainer.h"

#include <cmath>

#include <gtest/gtest.h>

#include "ols/checkpoint.h"
#include "ols/errors.h"
#include "ols/synthetic.h"
#include "oracles.h"

namespace ols {
namespace {

DatasetPair small_ring(std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.num_classes = 4;
  spec.train_per_class = 25;
  spec.test_per_class = 10;
  spec.seed = seed;
  return make_synthetic(spec);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.model.arch = Architecture::kMlp;
  cfg.model.widths = {2, 8, 4};
  cfg.model.num_classes = 4;
  cfg.sgd.learning_rate = 0.05;
  cfg.sgd.weight_decay = 1e-4;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seeds = {11, 12, 13};
  return cfg;
}

std::vector<Tensor> param_values(const Network& net) {
  std::vector<Tensor> v;
  for (const auto& p : net.params()) v.push_back(p.value);
  return v;
}

// Hand-written hard-label loop sharing only the building blocks with fit().
TEST(TrainerTest, HardLabelMatchesReferenceLoop) {
  const DatasetPair data = small_ring();
  const TrainConfig cfg = small_config();
  const FitResult fitted = fit(cfg, data.train, data.test);

  Model ref = build_model(cfg.model, cfg.seeds.init);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const BatchPlan plan(data.train.size(), cfg.batch_size,
                         epoch_shuffle_seed(cfg.seeds.shuffle, epoch));
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < plan.size(); ++b) {
      const Batch batch = gather(data.train, plan.indices(b));
      const Tensor targets = one_hot(batch.labels, 4);
      const ForwardPass pass = ref.net.forward(batch.features);
      loss_sum += testing::reference_loss(pass.logits(), targets) *
                  static_cast<double>(batch.labels.size());
      const Tensor probs = pass.probs();
      Tensor grad({batch.labels.size(), 4});
      for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
          grad.at(i, c) = (probs.at(i, c) - targets.at(i, c)) /
                          static_cast<double>(batch.labels.size());
        }
      }
      ref.net.params().zero_grad();
      ref.net.backward(pass, grad);
      sgd_step(ref.net.params(), cfg.sgd, epoch);
    }
    const MetricsRecord& rec = fitted.metrics[static_cast<std::size_t>(epoch - 1)];
    EXPECT_NEAR(rec.loss_hard, loss_sum / static_cast<double>(data.train.size()), 1e-12);
    EXPECT_NEAR(rec.loss_soft, rec.loss_hard, 1e-12);
  }
  const auto got = param_values(fitted.model.net);
  const auto want = param_values(ref.net);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    for (std::size_t j = 0; j < got[i].size(); ++j) {
      EXPECT_NEAR(got[i][j], want[i][j], 1e-12);
    }
  }
}

TEST(TrainerTest, OlsWithAlphaOneIsBitIdenticalToHard) {
  const DatasetPair data = small_ring();
  TrainConfig hard = small_config();
  TrainConfig ols = hard;
  ols.strategy = strategy::OLS{1.0};
  const FitResult a = fit(hard, data.train, data.test);
  const FitResult b = fit(ols, data.train, data.test);
  EXPECT_EQ(param_values(a.model.net), param_values(b.model.net));
  for (std::size_t e = 0; e < a.metrics.size(); ++e) {
    EXPECT_EQ(a.metrics[e].test_top1_error, b.metrics[e].test_top1_error);
    EXPECT_EQ(a.metrics[e].loss_hard, b.metrics[e].loss_hard);
  }
}

TEST(TrainerTest, RunsAreDeterministic) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.strategy = strategy::OLS{0.5};
  cfg.noise_rate = 0.2;
  const FitResult a = fit(cfg, data.train, data.test);
  const FitResult b = fit(cfg, data.train, data.test);
  EXPECT_EQ(param_values(a.model.net), param_values(b.model.net));
  EXPECT_EQ(a.bank->supervision(), b.bank->supervision());
  EXPECT_EQ(a.train.labels, b.train.labels);
  cfg.seeds.shuffle += 1;
  EXPECT_NE(param_values(fit(cfg, data.train, data.test).model.net),
            param_values(a.model.net));
}

TEST(TrainerTest, FirstEpochOlsTargetsAreUniform) {
  const DatasetPair data = small_ring();
  for (const LabelStrategy s : {LabelStrategy{strategy::OLS{0.5}},
                                LabelStrategy{strategy::OLSSingle{0.5}}}) {
    TrainConfig cfg = small_config();
    cfg.strategy = s;
    cfg.epochs = 2;
    std::size_t checked = 0;
    bool later_non_uniform = false;
    FitHooks hooks;
    hooks.on_iteration = [&](const IterationView& v) {
      for (double t : v.soft_targets->data()) {
        if (v.epoch == 1) {
          EXPECT_EQ(t, 0.25);
          ++checked;
        } else if (t != 0.25) {
          later_non_uniform = true;
        }
      }
    };
    fit(cfg, data.train, data.test, hooks);
    EXPECT_EQ(checked, data.train.size() * 4);
    EXPECT_TRUE(later_non_uniform) << strategy_name(s);
  }
}

// Epoch-2 targets must be the per-class means of epoch-1 correct pre-update
// predictions, and must not move while epoch 2 accumulates.
TEST(TrainerTest, OlsTargetsComeFromThePreviousEpoch) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.strategy = strategy::OLS{0.5};
  cfg.epochs = 2;
  std::vector<std::vector<double>> sum(4, std::vector<double>(4, 0.0));
  std::vector<double> count(4, 0.0);
  Tensor first_epoch2_supervision;
  FitHooks hooks;
  hooks.on_iteration = [&](const IterationView& v) {
    const std::size_t n = v.batch->labels.size();
    if (v.epoch == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto p = v.probs->row(i);
        const int y = v.batch->labels[i];
        if (static_cast<int>(argmax(p)) != y) continue;
        count[static_cast<std::size_t>(y)] += 1;
        for (std::size_t c = 0; c < 4; ++c) sum[static_cast<std::size_t>(y)][c] += p[c];
      }
      // Accumulating must not leak into the targets of the same period.
      for (double s : v.bank->supervision().data()) EXPECT_EQ(s, 0.25);
      return;
    }
    if (first_epoch2_supervision.empty()) first_epoch2_supervision = v.bank->supervision();
    for (std::size_t i = 0; i < n; ++i) {
      const auto y = static_cast<std::size_t>(v.batch->labels[i]);
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(v.soft_targets->at(i, c), first_epoch2_supervision.at(c, y));
      }
    }
  };
  fit(cfg, data.train, data.test, hooks);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double want = count[y] > 0 ? sum[y][c] / count[y] : 0.25;
      EXPECT_NEAR(first_epoch2_supervision.at(c, y), want, 1e-12);
    }
  }
}

TEST(TrainerTest, UpdatePeriodInIterations) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.strategy = strategy::OLS{0.5};
  cfg.update_period = 3;
  std::vector<Tensor> seen;
  FitHooks hooks;
  hooks.on_iteration = [&](const IterationView& v) {
    seen.push_back(v.bank->supervision());
  };
  fit(cfg, data.train, data.test, hooks);
  std::size_t changes = 0;
  for (std::size_t i = 1; i < seen.size(); ++i) {
    // Hook i+1 (1-based) runs after a finalize only when i is a multiple of 3.
    if (i % 3 != 0) {
      EXPECT_EQ(seen[i], seen[i - 1]) << "iteration " << i + 1;
    } else if (seen[i] != seen[i - 1]) {
      ++changes;
    }
  }
  EXPECT_GT(changes, 0u);
}

TEST(TrainerTest, EveryStrategyTrains) {
  const DatasetPair data = small_ring();
  const std::vector<LabelStrategy> all = {
      strategy::Hard{},          strategy::UniformLS{0.1}, strategy::TfKD{0.9},
      strategy::BootstrapSoft{}, strategy::BootstrapHard{}, strategy::OLS{},
      strategy::OLSSingle{}};
  for (const auto& s : all) {
    TrainConfig cfg = small_config();
    cfg.strategy = s;
    const FitResult r = fit(cfg, data.train, data.test);
    ASSERT_EQ(r.metrics.size(), 3u) << strategy_name(s);
    EXPECT_LT(r.metrics.back().test_top1_error, 75.0) << strategy_name(s);
    EXPECT_EQ(r.bank.has_value(), uses_soft_label_bank(s));
  }
}

TEST(TrainerTest, WrongLabelFitMatchesOracle) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.noise_rate = 0.4;
  const FitResult r = fit(cfg, data.train, data.test);
  EXPECT_DOUBLE_EQ(r.train.noise_rate(), 0.4);
  const Tensor probs = predict_all(r.model.net, r.train.features);
  double corrupted = 0.0, fit_wrong = 0.0;
  for (std::size_t i = 0; i < r.train.size(); ++i) {
    if (r.train.labels[i] == r.train.clean_labels[i]) continue;
    corrupted += 1;
    fit_wrong += static_cast<int>(argmax(probs.row(i))) == r.train.labels[i];
  }
  ASSERT_TRUE(r.metrics.back().wrong_label_fit.has_value());
  EXPECT_DOUBLE_EQ(*r.metrics.back().wrong_label_fit, 100.0 * fit_wrong / corrupted);
  EXPECT_FALSE(fit(small_config(), data.train, data.test).metrics.back().wrong_label_fit);
}

TEST(TrainerTest, CheckpointsAndSoftLabelDumps) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.epochs = 4;
  cfg.strategy = strategy::OLS{0.5};
  cfg.checkpoint_every = 2;
  cfg.dump_soft_labels = true;
  cfg.output_dir = testing::scratch_dir("trainer_ckpt");
  const FitResult r = fit(cfg, data.train, data.test);
  ASSERT_EQ(r.checkpoints.size(), 2u);
  EXPECT_EQ(r.checkpoints[1].filename(), "epoch_0004.ckpt");
  const Checkpoint last = load_checkpoint(r.checkpoints[1]);
  EXPECT_EQ(last.epoch, 4);
  EXPECT_EQ(last.strategy, "ols");
  ASSERT_TRUE(last.bank.has_value());
  EXPECT_EQ(last.bank->supervision(), r.bank->supervision());
  EXPECT_EQ(param_values(restore_model(last).net), param_values(r.model.net));
  for (int e = 1; e <= 4; ++e) {
    EXPECT_TRUE(std::filesystem::exists(
        cfg.output_dir / ("soft_labels_epoch_" + std::to_string(e) + ".csv")));
  }
}

TEST(TrainerTest, DivergenceIsReported) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.sgd.learning_rate = 1e300;
  cfg.sgd.momentum = 0.0;
  cfg.sgd.weight_decay = 0.0;
  try {
    fit(cfg, data.train, data.test);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.iteration(), 1);
    EXPECT_GE(e.epoch(), 1);
  }
}

TEST(TrainerTest, ConfigValidation) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  EXPECT_THROW(fit(cfg, data.train, data.test), ConfigError);
  cfg = small_config();
  cfg.checkpoint_every = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.model.widths = {2, 8, 3};
  cfg.model.num_classes = 3;
  EXPECT_THROW(fit(cfg, data.train, data.test), ConfigError);
}

TEST(EvaluateTest, ZeroModelPredictsClassZero) {
  const DatasetPair data = small_ring();
  TrainConfig cfg = small_config();
  Model m = build_model(cfg.model, 1);
  for (auto& p : m.net.params()) p.value.fill(0.0);
  const EvalResult r = evaluate(m.net, data.test);
  double zeros = 0.0;
  for (int y : data.test.labels) zeros += y == 0;
  EXPECT_DOUBLE_EQ(r.top1_error,
                   100.0 * (1.0 - zeros / static_cast<double>(data.test.size())));
  EXPECT_FALSE(r.top5_error.has_value());
}

TEST(EvaluateTest, IdentityModelIsPerfectOnOneHotInputs) {
  ModelSpec spec;
  spec.widths = {3, 3};
  spec.num_classes = 3;
  Model m = build_model(spec, 0);
  Tensor& w = m.net.params()[0].value;
  w.fill(0.0);
  for (std::size_t i = 0; i < 3; ++i) w.at(i, i) = 5.0;
  Dataset ds;
  ds.num_classes = 3;
  ds.features = Tensor::matrix({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}});
  ds.labels = {0, 2, 1};
  ds.clean_labels = ds.labels;
  EXPECT_EQ(evaluate(m.net, ds).top1_error, 0.0);
}

TEST(EvaluateTest, TopkHandFixture) {
  const Tensor probs =
      Tensor::matrix({{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}, {0.4, 0.4, 0.2}});
  const std::vector<int> labels = {0, 1, 1};
  EXPECT_DOUBLE_EQ(topk_error(probs, labels, 1), 200.0 / 3.0);
  EXPECT_DOUBLE_EQ(topk_error(probs, labels, 2), 0.0);
  EXPECT_DOUBLE_EQ(topk_error(probs, labels, 3), 0.0);
}

TEST(EvaluateTest, PredictAllIsChunkIndependent) {
  const DatasetPair data = small_ring();
  const Model m = build_model(small_config().model, 4);
  EXPECT_EQ(predict_all(m.net, data.test.features, 7),
            predict_all(m.net, data.test.features, 1000));
}

}  // namespace
}  // namespace ols
