// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols_lab/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ols/dataset.h"
#include "ols/errors.h"

namespace ols::lab {
namespace {

using nlohmann::json;

// Collects every schema problem so one error message can list them all.
struct Problems {
  std::vector<std::string> items;

  void add(std::string msg) { items.push_back(std::move(msg)); }
  void raise() const {
    if (items.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& s : items) msg += "\n  " + s;
    throw ConfigError(msg);
  }
};

// One JSON object of the config. Reads record the consumed keys; close()
// reports the rest as unknown.
class Section {
 public:
  Section(const json& j, std::string prefix, Problems& problems)
      : j_(j), prefix_(std::move(prefix)), problems_(problems) {
    if (!j_.is_object()) {
      problems_.add("'" + name() + "' must be an object");
      ok_ = false;
    }
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  ~Section() { close(); }

  bool has(const char* key) {
    seen_.insert(key);
    return ok_ && j_.contains(key) && !j_.at(key).is_null();
  }

  template <class T>
  void optional(const char* key, T& out) {
    if (!has(key)) return;
    read(key, out);
  }

  template <class T>
  void required(const char* key, T& out) {
    if (!has(key)) {
      if (ok_) problems_.add("missing required key '" + path(key) + "'");
      return;
    }
    read(key, out);
  }

  // Child section; a missing child reads as an empty object.
  Section child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    if (!ok_ || !j_.contains(key) || j_.at(key).is_null()) {
      return Section(kEmpty, path(key), problems_);
    }
    return Section(j_.at(key), path(key), problems_);
  }

  void require_child(const char* key) {
    if (ok_ && (!j_.contains(key) || j_.at(key).is_null())) {
      problems_.add("missing required key '" + path(key) + "'");
    }
  }

  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }
  void problem(const char* key, const std::string& msg) {
    problems_.add("key '" + path(key) + "': " + msg);
  }

 private:
  std::string name() const { return prefix_.empty() ? "<root>" : prefix_; }

  template <class T>
  void read(const char* key, T& out) {
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      problem(key, "unexpected value " + j_.at(key).dump());
    }
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    if (!ok_) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) problems_.add("unknown key '" + path(key.c_str()) + "'");
    }
  }

  const json& j_;
  std::string prefix_;
  Problems& problems_;
  std::set<std::string> seen_;
  bool ok_ = true;
  bool closed_ = false;
};

// "epoch" or a positive iteration count; 0 stands for one epoch.
bool parse_period(const json& v, std::size_t& out) {
  if (v.is_string() && v.get<std::string>() == "epoch") {
    out = 0;
    return true;
  }
  if (v.is_number_integer() && v.get<std::int64_t>() >= 1) {
    out = static_cast<std::size_t>(v.get<std::int64_t>());
    return true;
  }
  return false;
}

json period_json(std::size_t p) { return p == 0 ? json("epoch") : json(p); }

void parse_data(Section s, DataConfig& d) {
  std::string source = "synthetic";
  s.optional("source", source);
  if (source == "synthetic") {
    d.source = DataSource::kSynthetic;
  } else if (source == "cifar10") {
    d.source = DataSource::kCifar10;
  } else if (source == "csv") {
    d.source = DataSource::kCsv;
  } else {
    s.problem("source", "expected synthetic, cifar10 or csv");
  }

  {
    Section syn = s.child("synthetic");
    SyntheticSpec& sp = d.synthetic;
    syn.optional("num_classes", sp.num_classes);
    syn.optional("train_per_class", sp.train_per_class);
    syn.optional("test_per_class", sp.test_per_class);
    syn.optional("dim", sp.dim);
    std::string layout = "ring";
    syn.optional("layout", layout);
    if (layout == "ring") {
      sp.layout = MeanLayout::kRing;
    } else if (layout == "custom") {
      sp.layout = MeanLayout::kCustom;
    } else {
      syn.problem("layout", "expected ring or custom");
    }
    syn.optional("radius", sp.radius);
    syn.optional("means", sp.means);
    syn.optional("seed", sp.seed);
  }
  {
    Section c = s.child("cifar10");
    std::string dir;
    if (d.source == DataSource::kCifar10) {
      c.required("dir", dir);
    } else {
      c.optional("dir", dir);
    }
    d.cifar_dir = dir;
    c.optional("limit", d.cifar.limit);
    c.optional("mean", d.cifar.mean);
    c.optional("std", d.cifar.stddev);
  }
  {
    Section c = s.child("csv");
    std::string train, test;
    if (d.source == DataSource::kCsv) {
      c.required("train", train);
      c.required("test", test);
      c.required("num_classes", d.num_classes);
    } else {
      c.optional("train", train);
      c.optional("test", test);
      c.optional("num_classes", d.num_classes);
    }
    d.train_csv = train;
    d.test_csv = test;
  }
}

void parse_strategy(Section s, LabelStrategy& out) {
  std::string name;
  s.required("name", name);
  if (name == "hard") {
    out = strategy::Hard{};
  } else if (name == "uniform_ls") {
    strategy::UniformLS v;
    s.optional("epsilon", v.epsilon);
    out = v;
  } else if (name == "tfkd") {
    strategy::TfKD v;
    s.optional("a", v.a);
    out = v;
  } else if (name == "bootstrap_soft") {
    strategy::BootstrapSoft v;
    s.optional("beta", v.beta);
    out = v;
  } else if (name == "bootstrap_hard") {
    strategy::BootstrapHard v;
    s.optional("beta", v.beta);
    out = v;
  } else if (name == "ols") {
    strategy::OLS v;
    s.optional("alpha", v.alpha);
    out = v;
  } else if (name == "ols_single") {
    strategy::OLSSingle v;
    s.optional("alpha", v.alpha);
    out = v;
  } else if (!name.empty()) {
    s.problem("name",
              "expected hard, uniform_ls, tfkd, bootstrap_soft, "
              "bootstrap_hard, ols or ols_single");
  }
}

json strategy_json(const LabelStrategy& s) {
  json j = {{"name", strategy_name(s)}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, strategy::UniformLS>) {
          j["epsilon"] = v.epsilon;
        } else if constexpr (std::is_same_v<T, strategy::TfKD>) {
          j["a"] = v.a;
        } else if constexpr (std::is_same_v<T, strategy::BootstrapSoft> ||
                             std::is_same_v<T, strategy::BootstrapHard>) {
          j["beta"] = v.beta;
        } else if constexpr (std::is_same_v<T, strategy::OLS> ||
                             std::is_same_v<T, strategy::OLSSingle>) {
          j["alpha"] = v.alpha;
        }
      },
      s);
  return j;
}

void parse_attack(Section s, AttackSweep& a) {
  std::string method = "fgsm";
  s.optional("method", method);
  if (method == "fgsm") {
    a.method = AttackMethod::kFgsm;
  } else if (method == "pgd") {
    a.method = AttackMethod::kPgd;
  } else {
    s.problem("method", "expected fgsm or pgd");
  }
  s.required("epsilons", a.epsilons);
  std::string units = "raw";
  s.optional("units", units);
  if (units == "raw") {
    a.pixel_units = false;
  } else if (units == "pixel255") {
    a.pixel_units = true;
  } else {
    s.problem("units", "expected raw or pixel255");
  }
  s.optional("iterations", a.iterations);
  s.optional("step_fraction", a.step_fraction);
  s.optional("random_start", a.random_start);
  s.optional("seed", a.seed);
  double v = 0.0;
  if (s.has("lo")) {
    s.optional("lo", v);
    a.lo = v;
  }
  if (s.has("hi")) {
    s.optional("hi", v);
    a.hi = v;
  }
}

json attack_json(const AttackSweep& a) {
  return {{"method", to_string(a.method)},
          {"epsilons", a.epsilons},
          {"units", a.pixel_units ? "pixel255" : "raw"},
          {"iterations", a.iterations},
          {"step_fraction", a.step_fraction},
          {"random_start", a.random_start},
          {"seed", a.seed},
          {"lo", a.lo ? json(*a.lo) : json(nullptr)},
          {"hi", a.hi ? json(*a.hi) : json(nullptr)}};
}

}  // namespace

std::size_t DataConfig::classes() const {
  switch (source) {
    case DataSource::kSynthetic:
      return synthetic.num_classes;
    case DataSource::kCifar10:
      return 10;
    case DataSource::kCsv:
      return num_classes;
  }
  return 0;
}

AttackConfig AttackSweep::at(double epsilon) const {
  const double eps = pixel_units ? from_pixel_units(epsilon) : epsilon;
  AttackConfig c;
  if (method == AttackMethod::kFgsm) {
    c = AttackConfig::fgsm(eps);
  } else {
    c = AttackConfig::pgd(eps, iterations, random_start, seed);
    c.step = step_fraction * eps;
  }
  c.seed = seed;
  if (lo) c.lo = *lo;
  if (hi) c.hi = *hi;
  return c;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  Problems problems;
  {
    Section root(j, "", problems);
    root.require_child("data");
    parse_data(root.child("data"), cfg.data);

    TrainConfig& t = cfg.train;
    {
      root.require_child("model");
      Section m = root.child("model");
      std::string arch;
      m.required("arch", arch);
      if (!arch.empty()) {
        try {
          t.model.arch = parse_architecture(arch);
        } catch (const ConfigError& e) {
          m.problem("arch", e.what());
        }
      }
      m.required("widths", t.model.widths);
      m.optional("input_shape", t.model.input_shape);
    }
    {
      Section s = root.child("sgd");
      s.optional("learning_rate", t.sgd.learning_rate);
      s.optional("momentum", t.sgd.momentum);
      s.optional("weight_decay", t.sgd.weight_decay);
      s.optional("milestones", t.sgd.milestones);
      s.optional("decay_factor", t.sgd.decay_factor);
    }
    root.required("epochs", t.epochs);
    root.optional("batch_size", t.batch_size);
    root.require_child("strategy");
    parse_strategy(root.child("strategy"), t.strategy);
    if (root.has("update_period") && !parse_period(root.raw("update_period"), t.update_period)) {
      root.problem("update_period", "expected \"epoch\" or a positive integer");
    }
    root.optional("noise_rate", t.noise_rate);
    {
      Section s = root.child("seeds");
      s.optional("init", t.seeds.init);
      s.optional("shuffle", t.seeds.shuffle);
      s.optional("noise", t.seeds.noise);
    }
    root.optional("checkpoint_every", t.checkpoint_every);
    std::string out;
    root.optional("output_dir", out);
    t.output_dir = out;
    root.optional("dump_soft_labels", t.dump_soft_labels);

    {
      Section e = root.child("eval");
      e.optional("ece", cfg.eval.ece);
      e.optional("ece_bins", cfg.eval.ece_bins);
      if (e.has("kl_reference")) {
        std::string ref;
        e.optional("kl_reference", ref);
        cfg.eval.kl_reference = ref;
      }
      e.optional("kl_only_correct", cfg.eval.kl_only_correct);
      if (e.has("attack")) {
        cfg.eval.attack.emplace();
        parse_attack(e.child("attack"), *cfg.eval.attack);
      }
    }
    {
      Section e = root.child("ensemble");
      e.optional("checkpoints", cfg.ensemble.checkpoints);
      e.optional("sizes", cfg.ensemble.sizes);
    }
    {
      Section s = root.child("sweep");
      s.optional("alpha", cfg.sweep.alpha);
      s.optional("noise_rate", cfg.sweep.noise_rate);
      s.optional("seed", cfg.sweep.seed);
      if (s.has("update_period")) {
        const json& v = s.raw("update_period");
        bool ok = v.is_array();
        if (ok) {
          for (const json& e : v) {
            std::size_t p = 0;
            if (!parse_period(e, p)) ok = false;
            cfg.sweep.update_period.push_back(p);
          }
        }
        if (!ok) s.problem("update_period", "expected a list of \"epoch\" or positive integers");
      }
    }
    root.optional("checkpoint", cfg.checkpoint);
  }
  problems.raise();

  cfg.train.model.num_classes = cfg.data.classes();
  if (cfg.data.source == DataSource::kSynthetic) cfg.data.synthetic.validate();
  try {
    cfg.train.sgd.validate();
    validate(cfg.train.strategy);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.train.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.train.noise_rate >= 0.0 && cfg.train.noise_rate <= 1.0)) {
    throw ConfigError("noise_rate must lie in [0, 1]");
  }
  if (cfg.eval.ece_bins < 1) throw ConfigError("eval.ece_bins must be >= 1");
  if (cfg.eval.attack) {
    if (cfg.eval.attack->epsilons.empty()) {
      throw ConfigError("eval.attack.epsilons must not be empty");
    }
    for (double e : cfg.eval.attack->epsilons) cfg.eval.attack->at(e).validate();
  }
  for (std::size_t m : cfg.ensemble.sizes) {
    if (m == 0) throw ConfigError("ensemble.sizes entries must be >= 1");
  }
  for (double a : cfg.sweep.alpha) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep.alpha values must lie in [0, 1]");
  }
  for (double r : cfg.sweep.noise_rate) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ConfigError("sweep.noise_rate values must lie in [0, 1]");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " @ offset " + std::to_string(e.byte) +
                      ": malformed JSON");
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  const DataConfig& d = cfg.data;
  const SyntheticSpec& sp = d.synthetic;
  const char* source = d.source == DataSource::kSynthetic ? "synthetic"
                       : d.source == DataSource::kCifar10 ? "cifar10"
                                                          : "csv";
  json data = {{"source", source}};
  if (d.source == DataSource::kSynthetic) {
    data["synthetic"] = {{"num_classes", sp.num_classes},
                         {"train_per_class", sp.train_per_class},
                         {"test_per_class", sp.test_per_class},
                         {"dim", sp.dim},
                         {"layout", sp.layout == MeanLayout::kRing ? "ring" : "custom"},
                         {"radius", sp.radius},
                         {"means", sp.means},
                         {"seed", sp.seed}};
  } else if (d.source == DataSource::kCifar10) {
    data["cifar10"] = {{"dir", d.cifar_dir.string()},
                       {"limit", d.cifar.limit},
                       {"mean", d.cifar.mean},
                       {"std", d.cifar.stddev}};
  } else {
    data["csv"] = {{"train", d.train_csv.string()},
                   {"test", d.test_csv.string()},
                   {"num_classes", d.num_classes}};
  }

  const TrainConfig& t = cfg.train;
  json eval = {{"ece", cfg.eval.ece},
               {"ece_bins", cfg.eval.ece_bins},
               {"kl_reference", cfg.eval.kl_reference
                                    ? json(cfg.eval.kl_reference->string())
                                    : json(nullptr)},
               {"kl_only_correct", cfg.eval.kl_only_correct},
               {"attack", cfg.eval.attack ? attack_json(*cfg.eval.attack) : json(nullptr)}};
  json periods = json::array();
  for (std::size_t p : cfg.sweep.update_period) periods.push_back(period_json(p));

  return {
      {"data", data},
      {"model",
       {{"arch", to_string(t.model.arch)},
        {"widths", t.model.widths},
        {"input_shape", t.model.resolved_input_shape()}}},
      {"sgd",
       {{"learning_rate", t.sgd.learning_rate},
        {"momentum", t.sgd.momentum},
        {"weight_decay", t.sgd.weight_decay},
        {"milestones", t.sgd.milestones},
        {"decay_factor", t.sgd.decay_factor}}},
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"strategy", strategy_json(t.strategy)},
      {"update_period", period_json(t.update_period)},
      {"noise_rate", t.noise_rate},
      {"seeds", {{"init", t.seeds.init}, {"shuffle", t.seeds.shuffle}, {"noise", t.seeds.noise}}},
      {"checkpoint_every", t.checkpoint_every},
      {"output_dir", t.output_dir.string()},
      {"dump_soft_labels", t.dump_soft_labels},
      {"eval", eval},
      {"ensemble", {{"checkpoints", cfg.ensemble.checkpoints}, {"sizes", cfg.ensemble.sizes}}},
      {"sweep",
       {{"alpha", cfg.sweep.alpha},
        {"update_period", periods},
        {"noise_rate", cfg.sweep.noise_rate},
        {"seed", cfg.sweep.seed}}},
      {"checkpoint", cfg.checkpoint},
  };
}

std::string run_id(const json& resolved) {
  json j = resolved;
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DatasetPair load_data(const DataConfig& cfg) {
  switch (cfg.source) {
    case DataSource::kSynthetic:
      return make_synthetic(cfg.synthetic);
    case DataSource::kCifar10:
      return load_cifar10(cfg.cifar_dir, cfg.cifar);
    case DataSource::kCsv:
      return {read_dataset_csv(cfg.train_csv, cfg.num_classes, Split::kTrain),
              read_dataset_csv(cfg.test_csv, cfg.num_classes, Split::kTest)};
  }
  throw ConfigError("unknown data source");
}

void resolve_model(ExperimentConfig& cfg, const DatasetPair& data) {
  ModelSpec& m = cfg.train.model;
  m.num_classes = data.train.num_classes;
  if (m.input_shape.empty()) m.input_shape = data.train.sample_shape();
  m.validate();
}

}  // namespace ols::lab
