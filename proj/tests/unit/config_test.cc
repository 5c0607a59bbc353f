// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols_lab/config.h"

#include <fstream>

#include <gtest/gtest.h>

#include "ols/errors.h"
#include "oracles.h"

namespace ols::lab {
namespace {

using nlohmann::json;

json minimal() {
  return {{"data", {{"source", "synthetic"}}},
          {"model", {{"arch", "mlp"}, {"widths", {2, 16, 10}}}},
          {"epochs", 2},
          {"strategy", {{"name", "ols"}, {"alpha", 0.7}}}};
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, MinimalConfigGetsDefaults) {
  const ExperimentConfig c = parse_config(minimal());
  EXPECT_EQ(c.data.source, DataSource::kSynthetic);
  EXPECT_EQ(c.data.synthetic.num_classes, 10u);
  EXPECT_EQ(c.train.epochs, 2);
  EXPECT_EQ(c.train.batch_size, 64u);
  EXPECT_EQ(c.train.update_period, 0u);
  ASSERT_TRUE(std::holds_alternative<strategy::OLS>(c.train.strategy));
  EXPECT_EQ(std::get<strategy::OLS>(c.train.strategy).alpha, 0.7);
  EXPECT_EQ(c.eval.ece_bins, 15u);
  EXPECT_FALSE(c.eval.attack.has_value());
}

TEST(ConfigTest, MissingKeyIsNamed) {
  json j = minimal();
  j.erase("epochs");
  EXPECT_NE(error_of(j).find("'epochs'"), std::string::npos) << error_of(j);
  j = minimal();
  j["model"].erase("widths");
  EXPECT_NE(error_of(j).find("'model.widths'"), std::string::npos) << error_of(j);
  j = minimal();
  j.erase("data");
  EXPECT_NE(error_of(j).find("'data'"), std::string::npos) << error_of(j);
}

TEST(ConfigTest, UnknownKeyIsAnError) {
  json j = minimal();
  j["sgd"] = {{"learning_rate", 0.1}, {"learning_rat", 0.2}};
  EXPECT_NE(error_of(j).find("'sgd.learning_rat'"), std::string::npos) << error_of(j);
  j = minimal();
  j["strategy"]["epsilon"] = 0.1;  // not a parameter of ols
  EXPECT_NE(error_of(j).find("strategy.epsilon"), std::string::npos) << error_of(j);
}

TEST(ConfigTest, AllProblemsAreReportedTogether) {
  json j = minimal();
  j.erase("epochs");
  j["bogus"] = 1;
  j["batch_size"] = "big";
  const std::string msg = error_of(j);
  EXPECT_NE(msg.find("epochs"), std::string::npos);
  EXPECT_NE(msg.find("bogus"), std::string::npos);
  EXPECT_NE(msg.find("batch_size"), std::string::npos);
}

TEST(ConfigTest, UpdatePeriodForms) {
  json j = minimal();
  j["update_period"] = "epoch";
  EXPECT_EQ(parse_config(j).train.update_period, 0u);
  j["update_period"] = 12;
  EXPECT_EQ(parse_config(j).train.update_period, 12u);
  j["update_period"] = 0;
  EXPECT_THROW(parse_config(j), ConfigError);
  j["update_period"] = "daily";
  EXPECT_THROW(parse_config(j), ConfigError);
  j["update_period"] = "epoch";
  j["sweep"] = {{"update_period", {"epoch", 12, 3072}}};
  EXPECT_EQ(parse_config(j).sweep.update_period, (std::vector<std::size_t>{0, 12, 3072}));
}

TEST(ConfigTest, EveryStrategyParses) {
  for (const char* name : {"hard", "uniform_ls", "tfkd", "bootstrap_soft",
                           "bootstrap_hard", "ols", "ols_single"}) {
    json j = minimal();
    j["strategy"] = {{"name", name}};
    EXPECT_EQ(strategy_name(parse_config(j).train.strategy), name);
  }
  json j = minimal();
  j["strategy"] = {{"name", "mixup"}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["strategy"] = {{"name", "uniform_ls"}, {"epsilon", 1.5}};
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(ConfigTest, AttackSection) {
  json j = minimal();
  j["eval"] = {{"attack", {{"method", "pgd"}, {"epsilons", {2, 8}}, {"units", "pixel255"},
                           {"iterations", 5}, {"lo", 0.0}, {"hi", 1.0}}}};
  const ExperimentConfig c = parse_config(j);
  ASSERT_TRUE(c.eval.attack.has_value());
  const AttackConfig a = c.eval.attack->at(8);
  EXPECT_EQ(a.method, AttackMethod::kPgd);
  EXPECT_DOUBLE_EQ(a.epsilon, 8.0 / 255.0);
  EXPECT_DOUBLE_EQ(a.step, 2.0 / 255.0);
  EXPECT_EQ(a.iterations, 5);
  EXPECT_EQ(a.hi, 1.0);
  j["eval"]["attack"].erase("epsilons");
  EXPECT_NE(error_of(j).find("eval.attack.epsilons"), std::string::npos);
  j = minimal();
  j["eval"] = {{"attack", {{"epsilons", {0.1}}}}};
  const AttackConfig f = parse_config(j).eval.attack->at(0.1);
  EXPECT_EQ(f.method, AttackMethod::kFgsm);
  EXPECT_EQ(f.step, 0.1);
  EXPECT_NO_THROW(f.validate());
}

TEST(ConfigTest, ResolvedJsonRoundTrips) {
  json j = minimal();
  j["eval"] = {{"ece", true}, {"attack", {{"epsilons", {0.1}}}}};
  j["sweep"] = {{"alpha", {0.3, 0.6}}};
  const ExperimentConfig c = parse_config(j);
  const json resolved = to_json(c);
  const ExperimentConfig again = parse_config(resolved);
  EXPECT_EQ(to_json(again), resolved);
}

TEST(ConfigTest, RunIdIgnoresOutputDir) {
  json a = to_json(parse_config(minimal()));
  json b = a;
  b["output_dir"] = "elsewhere";
  EXPECT_EQ(run_id(a), run_id(b));
  EXPECT_EQ(run_id(a).size(), 16u);
  b["epochs"] = 3;
  EXPECT_NE(run_id(a), run_id(b));
}

TEST(ConfigTest, LoadConfigReportsMalformedJson) {
  const auto dir = testing::scratch_dir("config_load");
  {
    std::ofstream out(dir / "bad.json");
    out << "{\"epochs\": 2,, }";
  }
  try {
    load_config(dir / "bad.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  EXPECT_THROW(load_config(dir / "none.json"), ConfigError);
}

TEST(ConfigTest, CsvSourceNeedsPaths) {
  json j = minimal();
  j["data"] = {{"source", "csv"}, {"csv", {{"train", "a.csv"}}}};
  const std::string msg = error_of(j);
  EXPECT_NE(msg.find("data.csv.test"), std::string::npos) << msg;
  EXPECT_NE(msg.find("data.csv.num_classes"), std::string::npos) << msg;
}

TEST(ConfigTest, ResolveModelFillsClassesAndShape) {
  ExperimentConfig c = parse_config(minimal());
  c.data.synthetic.train_per_class = 2;
  c.data.synthetic.test_per_class = 1;
  const DatasetPair d = load_data(c.data);
  resolve_model(c, d);
  EXPECT_EQ(c.train.model.num_classes, 10u);
  EXPECT_EQ(c.train.model.resolved_input_shape(), (Shape{2}));
}

}  // namespace
}  // namespace ols::lab
