// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols_lab/commands.h"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "ols/calibration.h"
#include "ols/checkpoint.h"
#include "ols/ensemble.h"
#include "ols/errors.h"
#include "ols/metrics_io.h"

namespace ols::lab {
namespace {

using nlohmann::json;

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json record_json(const MetricsRecord& r) {
  return {{"epoch", r.epoch},
          {"train_error", r.train_error},
          {"test_top1_error", r.test_top1_error},
          {"test_top5_error", optional_json(r.test_top5_error)},
          {"loss_hard", r.loss_hard},
          {"loss_soft", r.loss_soft},
          {"wrong_label_fit", optional_json(r.wrong_label_fit)}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

ExperimentConfig load_for(const CommandOptions& opts) {
  if (opts.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(opts.config);
  if (!opts.out.empty()) cfg.train.output_dir = opts.out;
  if (opts.dump_soft_labels) cfg.train.dump_soft_labels = true;
  if (cfg.train.output_dir.empty()) {
    throw ConfigError("no output directory: pass --out or set output_dir");
  }
  return cfg;
}

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::filesystem::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw DataError("glob failed for " + pattern);
  std::sort(out.begin(), out.end());
  return out;
}

// Trains one configured run and writes metrics.csv, timing.csv and
// summary.json into its output directory. Returns the final record.
MetricsRecord train_and_report(ExperimentConfig cfg, const DatasetPair& data,
                               json* summary_out) {
  resolve_model(cfg, data);
  const json resolved = to_json(cfg);
  const std::string id = run_id(resolved);
  if (cfg.train.output_dir.empty()) cfg.train.output_dir = std::filesystem::path("runs") / id;
  const FitResult r = fit(cfg.train, data.train, data.test);
  const std::filesystem::path& dir = cfg.train.output_dir;
  write_metrics_csv(dir / "metrics.csv", r.metrics);
  write_text_file(dir / "timing.csv", format_timing_csv(r.metrics));

  json summary = {{"run_id", id}, {"config", resolved}, {"final", record_json(r.metrics.back())}};
  json ckpts = json::array();
  for (const auto& p : r.checkpoints) ckpts.push_back(p.lexically_relative(dir).generic_string());
  summary["checkpoints"] = ckpts;
  summary.update(eval_fields(cfg.eval, r.model.net, data.test));
  write_json(dir / "summary.json", summary);
  if (summary_out) *summary_out = summary;
  return r.metrics.back();
}

// Report directory of eval, attack and ensemble; defaults to the cwd.
std::filesystem::path report_dir(const ExperimentConfig& cfg) {
  const auto dir = cfg.train.output_dir.empty() ? std::filesystem::path(".")
                                                : cfg.train.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

Model load_model(const std::string& path) {
  if (path.empty()) throw ConfigError("no checkpoint: pass --checkpoint or set checkpoint");
  return restore_model(load_checkpoint(path));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

json eval_fields(const EvalConfig& eval, const Network& net, const Dataset& test) {
  json out = json::object();
  const bool need_probs = eval.ece || eval.kl_reference;
  Tensor probs;
  if (need_probs) probs = predict_all(net, test.features);
  if (eval.ece) out["ece"] = ece(probs, test.labels, eval.ece_bins);
  if (eval.kl_reference) {
    const Tensor refs = load_reference_csv(*eval.kl_reference);
    out["kl"] = kl_to_reference(probs, refs, test.labels, eval.kl_only_correct);
  }
  if (eval.attack) {
    const AttackSweep& a = *eval.attack;
    json rows = json::array();
    for (double e : a.epsilons) {
      const AttackConfig c = a.at(e);
      rows.push_back({{"epsilon", e},
                      {"bound", c.epsilon},
                      {"step", c.step},
                      {"top1_error", robust_error(net, test, c).top1_error}});
    }
    out["attack"] = {{"method", to_string(a.method)}, {"results", rows}};
  }
  return out;
}

int run_train(const CommandOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_for(opts);
  const DatasetPair data = load_data(cfg.data);
  json summary;
  const MetricsRecord last = train_and_report(cfg, data, &summary);
  out << "run " << summary["run_id"].get<std::string>() << ": " << last.epoch
      << " epochs, test top-1 error " << fmt(last.test_top1_error) << "%\n";
  return kExitOk;
}

int run_eval(const CommandOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_for(opts);
  const Model model = load_model(opts.checkpoint.empty() ? cfg.checkpoint : opts.checkpoint);
  const DatasetPair data = load_data(cfg.data);
  const EvalResult r = evaluate(model.net, data.test);
  json report = {{"checkpoint", opts.checkpoint.empty() ? cfg.checkpoint : opts.checkpoint},
                 {"top1_error", r.top1_error},
                 {"top5_error", optional_json(r.top5_error)}};
  report.update(eval_fields(cfg.eval, model.net, data.test));
  write_json(report_dir(cfg) / "eval.json", report);
  out << "test top-1 error " << fmt(r.top1_error) << "%\n";
  return kExitOk;
}

int run_attack(const CommandOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_for(opts);
  if (!cfg.eval.attack) throw ConfigError("attack needs eval.attack in the config");
  const std::string path = opts.checkpoint.empty() ? cfg.checkpoint : opts.checkpoint;
  const Model model = load_model(path);
  const DatasetPair data = load_data(cfg.data);
  const EvalResult clean = evaluate(model.net, data.test);

  EvalConfig only_attack;
  only_attack.attack = cfg.eval.attack;
  json report = eval_fields(only_attack, model.net, data.test)["attack"];
  report["checkpoint"] = path;
  report["clean_top1_error"] = clean.top1_error;
  report["config"] = to_json(cfg)["eval"]["attack"];
  write_json(report_dir(cfg) / "attack.json", report);
  for (const json& row : report["results"]) {
    out << to_string(cfg.eval.attack->method) << " epsilon " << fmt(row["epsilon"].get<double>())
        << ": top-1 error " << fmt(row["top1_error"].get<double>()) << "%\n";
  }
  return kExitOk;
}

int run_ensemble(const CommandOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_for(opts);
  const std::string pattern = opts.checkpoints.empty() ? cfg.ensemble.checkpoints : opts.checkpoints;
  if (pattern.empty()) throw ConfigError("no checkpoints: pass --checkpoints or set ensemble.checkpoints");
  const auto paths = expand_glob(pattern);
  if (paths.empty()) throw DataError("no checkpoint matches " + pattern);

  std::vector<Model> models;
  json singles = json::array();
  const DatasetPair data = load_data(cfg.data);
  for (const auto& p : paths) {
    const Checkpoint ckpt = load_checkpoint(p);
    models.push_back(restore_model(ckpt));
    singles.push_back({{"checkpoint", p.generic_string()},
                       {"epoch", ckpt.epoch},
                       {"top1_error", evaluate(models.back().net, data.test).top1_error}});
  }
  json ensembles = json::array();
  for (std::size_t m : cfg.ensemble.sizes) {
    const auto picks = uniform_selection(models.size(), m);
    std::vector<Model> members;
    for (std::size_t i : picks) members.push_back(models[i]);
    const Tensor probs = ensemble_predict(members, data.test.features);
    json row = {{"size", m},
                {"members", picks},
                {"top1_error", topk_error(probs, data.test.labels, 1)}};
    if (data.test.num_classes >= 5) row["top5_error"] = topk_error(probs, data.test.labels, 5);
    ensembles.push_back(row);
    out << "ensemble of " << m << ": top-1 error " << fmt(row["top1_error"].get<double>()) << "%\n";
  }
  write_json(report_dir(cfg) / "ensemble.json",
             {{"pattern", pattern}, {"single", singles}, {"ensembles", ensembles}});
  return kExitOk;
}

int run_sweep(const CommandOptions& opts, std::ostream& out) {
  const ExperimentConfig base = load_for(opts);
  const SweepAxes& axes = base.sweep;
  if (axes.empty()) throw ConfigError("sweep needs at least one non-empty axis in 'sweep'");
  const bool has_alpha = std::holds_alternative<strategy::OLS>(base.train.strategy) ||
                         std::holds_alternative<strategy::OLSSingle>(base.train.strategy);
  if (!axes.alpha.empty() && !has_alpha) {
    throw ConfigError("sweep.alpha needs an ols or ols_single strategy");
  }

  struct Point {
    std::optional<double> alpha;
    std::optional<std::size_t> period;
    std::optional<double> noise;
    std::optional<std::uint64_t> seed;
  };
  auto axis = [](const auto& values) {
    using T = typename std::decay_t<decltype(values)>::value_type;
    std::vector<std::optional<T>> out(values.begin(), values.end());
    if (out.empty()) out.emplace_back();
    return out;
  };
  std::vector<Point> points;
  for (const auto& a : axis(axes.alpha)) {
    for (const auto& p : axis(axes.update_period)) {
      for (const auto& n : axis(axes.noise_rate)) {
        for (const auto& s : axis(axes.seed)) points.push_back({a, p, n, s});
      }
    }
  }

  const DatasetPair data = load_data(base.data);
  std::vector<ExperimentConfig> runs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ExperimentConfig c = base;
    const Point& pt = points[i];
    if (pt.alpha) {
      std::visit(
          [&](auto& v) {
            if constexpr (requires { v.alpha; }) v.alpha = *pt.alpha;
          },
          c.train.strategy);
    }
    if (pt.period) c.train.update_period = *pt.period;
    if (pt.noise) c.train.noise_rate = *pt.noise;
    if (pt.seed) c.train.seeds = {*pt.seed, *pt.seed, *pt.seed};
    char name[32];
    std::snprintf(name, sizeof(name), "run_%03zu", i);
    c.train.output_dir = base.train.output_dir / name;
    c.sweep = {};
    runs.push_back(std::move(c));
  }

  std::vector<MetricsRecord> finals(runs.size());
  std::vector<std::string> ids(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        json summary;
        finals[i] = train_and_report(runs[i], data, &summary);
        ids[i] = summary["run_id"].get<std::string>();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.threads, 1)), 1, runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string table =
      "run,run_id,alpha,update_period,noise_rate,seed,train_error,test_top1_error,"
      "wrong_label_fit\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TrainConfig& t = runs[i].train;
    std::string alpha;
    std::visit(
        [&](const auto& v) {
          if constexpr (requires { v.alpha; }) alpha = fmt(v.alpha);
        },
        t.strategy);
    const MetricsRecord& f = finals[i];
    table += runs[i].train.output_dir.filename().string() + ',' + ids[i] + ',' + alpha + ',' +
             (t.update_period ? std::to_string(t.update_period) : "epoch") + ',' +
             fmt(t.noise_rate) + ',' + std::to_string(t.seeds.init) + ',' + fmt(f.train_error) +
             ',' + fmt(f.test_top1_error) + ',' +
             (f.wrong_label_fit ? fmt(*f.wrong_label_fit) : "") + '\n';
  }
  write_text_file(base.train.output_dir / "sweep.csv", table);
  out << runs.size() << " runs written to " << base.train.output_dir.string() << "\n";
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online label smoothing laboratory"};
  app.require_subcommand(1);
  CommandOptions opts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "experiment config (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory (overrides output_dir)");
    sub->add_flag("--dump-soft-labels", opts.dump_soft_labels,
                  "write soft_labels_epoch_<t>.csv after every epoch");
    sub->add_option("--threads", opts.threads, "parallel runs for sweep")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* train = app.add_subcommand("train", "train one configured run");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  CLI::App* attack = app.add_subcommand("attack", "FGSM/PGD robustness of a checkpoint");
  CLI::App* ensemble = app.add_subcommand("ensemble", "epoch ensemble over checkpoints");
  CLI::App* sweep = app.add_subcommand("sweep", "run the configured sweep grid");
  for (CLI::App* sub : {train, eval, attack, ensemble, sweep}) common(sub);
  eval->add_option("--checkpoint", opts.checkpoint, "checkpoint file");
  attack->add_option("--checkpoint", opts.checkpoint, "checkpoint file");
  ensemble->add_option("--checkpoints", opts.checkpoints, "checkpoint glob");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return run_train(opts, out);
    if (*eval) return run_eval(opts, out);
    if (*attack) return run_attack(opts, out);
    if (*ensemble) return run_ensemble(opts, out);
    return run_sweep(opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const VersionError& e) {
    err << "version error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ols::lab
