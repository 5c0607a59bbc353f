// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "ols/trainer.h"
#include "ols_lab/config.h"

namespace ols::lab {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDiverged = 3,
  kExitIo = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;  // overrides output_dir when set
  bool dump_soft_labels = false;
  int threads = 1;
  std::string checkpoint;   // eval, attack
  std::string checkpoints;  // ensemble glob
};

// Each returns the process exit code; errors propagate as exceptions and are
// mapped by run_cli.
int run_train(const CommandOptions& opts, std::ostream& out);
int run_eval(const CommandOptions& opts, std::ostream& out);
int run_attack(const CommandOptions& opts, std::ostream& out);
int run_ensemble(const CommandOptions& opts, std::ostream& out);
int run_sweep(const CommandOptions& opts, std::ostream& out);

// Post-hoc metrics of `net` on `test` selected by `eval` (ece, kl,
// attack table), as summary JSON fields.
nlohmann::json eval_fields(const EvalConfig& eval, const Network& net,
                           const Dataset& test);

// Entry point of the ols_lab binary. Diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ols::lab
