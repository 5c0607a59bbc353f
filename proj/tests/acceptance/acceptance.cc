// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
//
//   ols_acceptance [--only 5,6]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "ols/attack.h"
#include "ols/calibration.h"
#include "ols/checkpoint.h"
#include "ols/ensemble.h"
#include "ols/soft_label_bank.h"
#include "ols/targets.h"
#include "ols/trainer.h"
#include "ols_lab/commands.h"
#include "ols_lab/config.h"
#include "oracles.h"

namespace {

using namespace ols;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
constexpr double kFgsmGamma = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += fmt(i ? " %.2f" : "%.2f", v[i]);
  return out + "]";
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d =
        fs::temp_directory_path() / ("ols_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path toy_config_path() { return fs::path(OLS_CONFIG_DIR) / "toy_noisy.json"; }

// Toy runs shared between criteria, trained on first use.
struct ToyRun {
  FitResult fit;
  Dataset test;
  double seconds = 0.0;
};

class ToyRuns {
 public:
  const ToyRun& get(const LabelStrategy& s, double noise, std::uint64_t seed) {
    const std::string key = strategy_name(s) + fmt("_%g_%llu", noise,
                                                   static_cast<unsigned long long>(seed));
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;

    lab::ExperimentConfig cfg = lab::load_config(toy_config_path());
    cfg.data.synthetic.seed = seed;
    const DatasetPair data = lab::load_data(cfg.data);
    lab::resolve_model(cfg, data);
    TrainConfig& t = cfg.train;
    t.strategy = s;
    t.noise_rate = noise;
    t.seeds = {seed, seed, seed};
    t.output_dir = work_dir() / key;
    t.checkpoint_every = noise == 0.0 ? 4 : 0;
    t.dump_soft_labels = false;
    const auto t0 = std::chrono::steady_clock::now();
    ToyRun run{fit(t, data.train, data.test), data.test, 0.0};
    run.seconds = seconds_since(t0);
    return runs_.emplace(key, std::move(run)).first->second;
  }

 private:
  std::map<std::string, ToyRun> runs_;
};

ToyRuns& toy() {
  static ToyRuns runs;
  return runs;
}

const LabelStrategy kOls = strategy::OLS{0.5};
const LabelStrategy kHard = strategy::Hard{};

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  int models = 0, mlp = 0, cnn = 0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    testing::GradientCase c = testing::random_gradient_case(seed);
    ++models;
    (c.model.spec.arch == Architecture::kMlp ? mlp : cnn)++;
    const auto p = testing::check_param_gradients(c.model.net, c.batch, c.targets);
    const auto x = testing::check_input_gradient(c.model.net, c.batch, c.targets);
    for (const auto* g : {&p, &x}) {
      if (g->max_rel_error > worst) {
        worst = g->max_rel_error;
        where = c.description + " " + g->worst;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          fmt("%d models (%d mlp, %d cnn), max rel err %.2e (< 1e-4) at %s; %.1f s (< 60 s)",
              models, mlp, cnn, worst, where.c_str(), secs)};
}

Outcome bank_algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst_mean = 0.0, worst_sum = 0.0;
  std::size_t zero_cols = 0, zero_changed = 0;
  for (int seq = 0; seq < 200; ++seq) {
    const std::size_t k = 2 + rng() % 11;
    SoftLabelBank bank(k);
    const int periods = 1 + static_cast<int>(rng() % 4);
    for (int period = 0; period < periods; ++period) {
      const Tensor before = bank.supervision();
      std::vector<std::vector<double>> sum(k, std::vector<double>(k, 0.0));
      std::vector<std::size_t> count(k, 0);
      const std::size_t steps = rng() % (8 * k);
      for (std::size_t s = 0; s < steps; ++s) {
        const int y = static_cast<int>(rng() % k);
        const auto p = testing::random_simplex(k, rng);
        // Predicted class: the argmax half the time, a random class otherwise.
        std::size_t pred = 0;
        for (std::size_t c = 1; c < k; ++c) pred = p[c] > p[pred] ? c : pred;
        if (rng() % 2) pred = rng() % k;
        bank.accumulate(y, p, static_cast<int>(pred));
        if (static_cast<int>(pred) != y) continue;
        ++count[static_cast<std::size_t>(y)];
        for (std::size_t c = 0; c < k; ++c) sum[static_cast<std::size_t>(y)][c] += p[c];
      }
      bank.finalize();
      for (std::size_t y = 0; y < k; ++y) {
        double col = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double got = bank.supervision().at(c, y);
          col += got;
          if (count[y] == 0) {
            zero_changed += got != before.at(c, y);
          } else {
            worst_mean = std::max(
                worst_mean, std::abs(got - sum[y][c] / static_cast<double>(count[y])));
          }
        }
        zero_cols += count[y] == 0;
        worst_sum = std::max(worst_sum, std::abs(col - 1.0));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst_mean <= 1e-9 && worst_sum <= 1e-9 && zero_changed == 0 && zero_cols > 0 &&
              secs < 10.0,
          fmt("200 sequences: max |col - mean| %.2e, max |sum - 1| %.2e (<= 1e-9), "
              "%zu zero-count columns with %zu changed entries; %.2f s (< 10 s)",
              worst_mean, worst_sum, zero_cols, zero_changed, secs)};
}

Outcome first_epoch_ls() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (double alpha : {0.5, 0.9}) {
    for (int i = 0; i < 1000; ++i) {
      const std::size_t k = 2 + rng() % 19;
      const auto p = testing::random_simplex(k, rng);
      const int y = static_cast<int>(rng() % k);
      const SoftLabelBank bank(k);  // state before the first finalize
      const double ols_loss = combined_loss(p, y, bank.target(y), alpha).total;
      const double eps = 1.0 - alpha;
      double ls_loss = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double t = (static_cast<int>(c) == y ? 1.0 - eps : 0.0) +
                         eps / static_cast<double>(k);
        ls_loss -= t * std::log(std::max(p[c], 1e-12));
      }
      worst = std::max(worst, std::abs(ols_loss - ls_loss));
    }
  }
  return {worst <= 1e-12,
          fmt("2000 vectors, alpha in {0.5, 0.9}: max |OLS - LS| %.2e (<= 1e-12)", worst)};
}

Outcome degenerate() {
  lab::ExperimentConfig cfg = lab::load_config(toy_config_path());
  const DatasetPair data = lab::load_data(cfg.data);
  lab::resolve_model(cfg, data);
  cfg.train.epochs = 3;
  cfg.train.output_dir.clear();
  cfg.train.dump_soft_labels = false;
  cfg.train.checkpoint_every = 0;
  auto trajectory = [&](const LabelStrategy& s) {
    TrainConfig t = cfg.train;
    t.strategy = s;
    std::vector<std::vector<Tensor>> traj;
    FitHooks hooks;
    hooks.on_epoch_end = [&](int, const Model& m) {
      std::vector<Tensor> v;
      for (const auto& p : m.net.params()) v.push_back(p.value);
      traj.push_back(std::move(v));
    };
    fit(t, data.train, data.test, hooks);
    return traj;
  };
  const auto hard = trajectory(strategy::Hard{});
  const auto ols1 = trajectory(strategy::OLS{1.0});
  const bool same_traj = hard == ols1 && hard.size() == 3;

  bool ls0 = true;
  for (std::size_t k = 2; k <= 20; ++k) {
    for (int y = 0; y < static_cast<int>(k); ++y) {
      ls0 = ls0 && uniform_ls_target(y, k, 0.0) == hard_target(y, k);
    }
  }
  return {same_traj && ls0,
          fmt("OLS(alpha=1) vs hard parameters after each of 3 epochs: %s; "
              "uniform_ls(eps=0) == hard for K=2..20: %s",
              same_traj ? "bit-identical" : "DIFFERENT", ls0 ? "yes" : "NO")};
}

Outcome noisy_trend() {
  std::vector<double> err_ols, err_hard, wlf_ols, wlf_hard;
  double secs = 0.0;
  for (auto seed : kSeeds) {
    const ToyRun& o = toy().get(kOls, 0.4, seed);
    const ToyRun& h = toy().get(kHard, 0.4, seed);
    secs += o.seconds + h.seconds;
    err_ols.push_back(o.fit.metrics.back().test_top1_error);
    err_hard.push_back(h.fit.metrics.back().test_top1_error);
    wlf_ols.push_back(o.fit.metrics.back().wrong_label_fit.value_or(NAN));
    wlf_hard.push_back(h.fit.metrics.back().wrong_label_fit.value_or(NAN));
  }
  const bool pass = mean(err_ols) < mean(err_hard) && mean(wlf_ols) < mean(wlf_hard) &&
                    secs < 600.0;
  return {pass, fmt("test err OLS %.2f %s vs hard %.2f %s; wrong-label fit OLS %.2f %s vs "
                    "hard %.2f %s (strictly lower); %.1f s for 6 runs (< 600 s)",
                    mean(err_ols), list(err_ols).c_str(), mean(err_hard),
                    list(err_hard).c_str(), mean(wlf_ols), list(wlf_ols).c_str(),
                    mean(wlf_hard), list(wlf_hard).c_str(), secs)};
}

Outcome diagonal_dominance() {
  int seeds_passing = 0;
  std::string per_seed;
  for (auto seed : kSeeds) {
    const ToyRun& o = toy().get(kOls, 0.0, seed);
    const Tensor& s = o.fit.bank->supervision();
    const std::size_t k = s.dim(0);
    std::size_t diag = 0, adjacent = 0;
    for (std::size_t y = 0; y < k; ++y) {
      std::size_t best = 0, best_off = y == 0 ? 1 : 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (s.at(c, y) > s.at(best, y)) best = c;
        if (c != y && s.at(c, y) > s.at(best_off, y)) best_off = c;
      }
      diag += best == y;
      adjacent += best_off == (y + 1) % k || best_off == (y + k - 1) % k;
    }
    const bool ok = diag == k && adjacent >= 8;
    seeds_passing += ok;
    per_seed += fmt(" seed %llu: diag %zu/10, adjacent %zu/10 %s;",
                    static_cast<unsigned long long>(seed), diag, adjacent, ok ? "ok" : "no");
  }
  return {seeds_passing >= 2, fmt("%d/3 seeds pass (majority needed):%s", seeds_passing,
                                  per_seed.c_str())};
}

std::vector<LabelStrategy> all_strategies() {
  return {strategy::Hard{},          strategy::UniformLS{0.1},    strategy::TfKD{0.95},
          strategy::BootstrapSoft{0.95}, strategy::BootstrapHard{0.8}, strategy::OLS{0.5},
          strategy::OLSSingle{0.5}};
}

double linf(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome attack_mechanics() {
  double fgsm_max = 0.0, pgd_excess = 0.0;
  int increased = 0, total = 0;
  std::string misses;
  for (const auto& s : all_strategies()) {
    for (auto seed : kSeeds) {
      const ToyRun& r = toy().get(s, 0.0, seed);
      const Network& net = r.fit.model.net;
      const double clean = evaluate(net, r.test).top1_error;
      const RobustResult adv = robust_error(net, r.test, AttackConfig::fgsm(kFgsmGamma));
      fgsm_max = std::max(fgsm_max, linf(adv.adversarial, r.test.features));
      ++total;
      if (adv.top1_error > clean) {
        ++increased;
      } else {
        misses += fmt(" %s/seed %llu (%.2f -> %.2f)", strategy_name(s).c_str(),
                      static_cast<unsigned long long>(seed), clean, adv.top1_error);
      }
    }
  }
  // PGD: the result after `it` iterations is the it-th iterate of a longer run.
  const ToyRun& o = toy().get(kOls, 0.0, 1);
  const double eps = 0.1;
  for (int it = 1; it <= 10; ++it) {
    const Tensor x = o.test.features;
    const Tensor adv = pgd_attack(o.fit.model.net, x, o.test.labels,
                                  AttackConfig::pgd(eps, it, true, 17));
    pgd_excess = std::max(pgd_excess, linf(adv, x) - eps);
  }
  const bool pass = fgsm_max <= kFgsmGamma && pgd_excess <= 0.0 && increased == total;
  return {pass, fmt("FGSM max |x_adv - x| %.17g (<= %.1f); PGD max excess over eps %.3g "
                    "(<= 0) for 10 iterates; error rises at gamma=0.1 in %d/%d runs%s",
                    fgsm_max, kFgsmGamma, pgd_excess, increased, total, misses.c_str())};
}

Outcome robustness_trend() {
  std::vector<double> ols_err, hard_err;
  for (auto seed : kSeeds) {
    for (const auto* s : {&kOls, &kHard}) {
      const ToyRun& r = toy().get(*s, 0.0, seed);
      const double e =
          robust_error(r.fit.model.net, r.test, AttackConfig::fgsm(kFgsmGamma)).top1_error;
      (s == &kOls ? ols_err : hard_err).push_back(e);
    }
  }
  return {mean(ols_err) <= mean(hard_err),
          fmt("FGSM gamma=0.1 error OLS %.2f %s vs hard %.2f %s (OLS <= hard)", mean(ols_err),
              list(ols_err).c_str(), mean(hard_err), list(hard_err).c_str())};
}

Outcome calibration() {
  // Implementation against the binning oracle, including confidences on edges.
  std::mt19937_64 rng(99);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 500, k = 2 + rng() % 9, bins = 1 + rng() % 20;
    Tensor p = testing::random_prob_rows(n, k, rng);
    if (trial % 2 == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double top = static_cast<double>(bins - rng() % bins) / static_cast<double>(bins);
        if (top * static_cast<double>(k) < 1.0) continue;
        const std::size_t c = rng() % k;
        for (std::size_t j = 0; j < k; ++j) {
          p.at(i, j) = j == c ? top : (1.0 - top) / static_cast<double>(k - 1);
        }
      }
    }
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % k);
    mismatches += ece(p, y, bins) != testing::brute_force_ece(p, y, bins);
  }
  std::vector<double> ols_ece, hard_ece;
  for (auto seed : kSeeds) {
    for (const auto* s : {&kOls, &kHard}) {
      const ToyRun& r = toy().get(*s, 0.0, seed);
      const double e = ece(predict_all(r.fit.model.net, r.test.features), r.test.labels);
      (s == &kOls ? ols_ece : hard_ece).push_back(e);
    }
  }
  return {mismatches == 0 && mean(ols_ece) <= mean(hard_ece),
          fmt("%d/100 fixtures differ from the oracle; 15-bin ECE OLS %.2f %s vs hard %.2f %s "
              "(OLS <= hard)",
              mismatches, mean(ols_ece), list(ols_ece).c_str(), mean(hard_ece),
              list(hard_ece).c_str())};
}

Outcome ensemble() {
  std::vector<double> ens, single;
  std::size_t members = 0;
  for (auto seed : kSeeds) {
    const ToyRun& r = toy().get(kOls, 0.0, seed);
    std::vector<Model> all;
    for (const auto& p : r.fit.checkpoints) all.push_back(restore_model(load_checkpoint(p)));
    std::vector<Model> picked;
    for (std::size_t i : uniform_selection(all.size(), 10)) picked.push_back(all[i]);
    members = picked.size();
    ens.push_back(topk_error(ensemble_predict(picked, r.test.features), r.test.labels, 1));
    single.push_back(r.fit.metrics.back().test_top1_error);
  }
  return {members == 10 && mean(ens) <= mean(single),
          fmt("%zu-checkpoint ensemble error %.2f %s vs final single %.2f %s (ensemble <= single)",
              members, mean(ens), list(ens).c_str(), mean(single), list(single).c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::string cfg = toy_config_path().string();
  std::ostringstream sink;
  int codes = 0;
  for (const char* name : {"det_a", "det_b"}) {
    const std::string out = (work_dir() / name).string();
    const char* argv[] = {"ols_lab", "train", "--config", cfg.c_str(), "--out", out.c_str()};
    codes += ols::lab::run_cli(6, argv, sink, sink);
  }
  const std::string a = slurp(work_dir() / "det_a" / "metrics.csv");
  const std::string b = slurp(work_dir() / "det_b" / "metrics.csv");
  const bool same = !a.empty() && a == b;
  return {codes == 0 && same,
          fmt("two CLI train runs of %s: exit codes sum %d, metrics.csv %zu bytes, %s",
              toy_config_path().filename().c_str(), codes, a.size(),
              same ? "byte-identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("OLS acceptance criteria");
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradients},
      {2, "soft-label bank algebra", bank_algebra},
      {3, "first-epoch LS equivalence", first_epoch_ls},
      {4, "degenerate-strategy equivalences", degenerate},
      {5, "toy noisy-label trend", noisy_trend},
      {6, "diagonal dominance", diagonal_dominance},
      {7, "attack mechanics", attack_mechanics},
      {8, "toy robustness trend", robustness_trend},
      {9, "calibration", calibration},
      {10, "checkpoint ensemble", ensemble},
      {11, "determinism", determinism},
  };
  int failed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": "
              << o.detail << std::endl;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  return failed == 0 ? 0 : 1;
}
