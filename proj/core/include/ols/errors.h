// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ols {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Class index or tensor index outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A numeric parameter outside its documented range (epsilon, alpha, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment or model configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Well-formed input carrying semantically invalid values.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, std::int64_t iteration, const std::string& what)
      : Error(what), epoch_(epoch), iteration_(iteration) {}

  int epoch() const { return epoch_; }
  std::int64_t iteration() const { return iteration_; }

 private:
  int epoch_;
  std::int64_t iteration_;
};

// Malformed or truncated file. Carries the file name and byte offset.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::uint64_t offset, const std::string& what)
      : Error(file + " @ offset " + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const { return file_; }
  std::uint64_t offset() const { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

// Checkpoint written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ols
