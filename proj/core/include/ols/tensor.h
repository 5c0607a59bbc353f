// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ols {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles. The product of the shape always equals
// the number of stored values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  // 2-D literal, e.g. Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Element (r, c) of a rank-2 tensor.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  // Number of values per slice along the leading axis.
  std::size_t row_size() const;
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;

  // Same values under a new shape of equal total size.
  Tensor reshaped(Shape shape) const;

  void fill(double value);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Standard matrix product with a fixed left-to-right reduction over k.
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise softmax over a rank-2 tensor of logits, max-subtracted.
Tensor softmax(const Tensor& logits);
void softmax_row(std::span<const double> logits, std::span<double> out);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

bool all_finite(std::span<const double> values);

}  // namespace ols
