// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "ols_lab/commands.h"

int main(int argc, char** argv) {
  return ols::lab::run_cli(argc, argv, std::cout, std::cerr);
}
