// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ols/tensor.h"

namespace ols {

// A trainable tensor with its gradient and momentum buffer. All three always
// share one shape.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor momentum;
};

class ParamSet {
 public:
  // Registers a parameter and returns its index. Names must be unique.
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }

  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t parameter_count() const;

 private:
  std::vector<Param> params_;
};

// y = x W^T + b on [n x in]; W is [out x in].
struct LinearLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight = 0;
  std::size_t bias = 0;
};

// Stride-1 convolution with zero padding on [n x C x H x W]; W is
// [out x in x k x k].
struct Conv2dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t padding = 1;
  std::size_t weight = 0;
  std::size_t bias = 0;
};

struct ReluLayer {};

// 2x2 window, stride 2; odd trailing rows/columns are dropped.
struct MaxPool2Layer {};

// [n x ...] -> [n x prod(...)].
struct FlattenLayer {};

using Layer =
    std::variant<LinearLayer, Conv2dLayer, ReluLayer, MaxPool2Layer, FlattenLayer>;

// Intermediate state of one forward pass, consumed by backward().
struct ForwardPass {
  // inputs[i] is the input of layer i; inputs.back() is the network output.
  std::vector<Tensor> inputs;
  // Per max-pool layer: flat input offset of each selected element.
  std::vector<std::vector<std::size_t>> pool_argmax;

  const Tensor& logits() const { return inputs.back(); }
  Tensor probs() const { return softmax(logits()); }
};

class Network {
 public:
  Network() = default;
  explicit Network(Shape sample_shape) : sample_shape_(std::move(sample_shape)) {}

  // Layer builders; parameters are created zero-initialized.
  void add_linear(std::size_t in, std::size_t out);
  void add_conv2d(std::size_t in_channels, std::size_t out_channels,
                  std::size_t kernel, std::size_t padding);
  void add_relu() { layers_.emplace_back(ReluLayer{}); }
  void add_maxpool2() { layers_.emplace_back(MaxPool2Layer{}); }
  void add_flatten() { layers_.emplace_back(FlattenLayer{}); }

  const Shape& sample_shape() const { return sample_shape_; }
  const std::vector<Layer>& layers() const { return layers_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  ForwardPass forward(const Tensor& batch) const;
  Tensor logits(const Tensor& batch) const { return forward(batch).logits(); }
  Tensor predict_proba(const Tensor& batch) const { return softmax(logits(batch)); }

  // Propagates dLoss/dlogits back through the layers and returns
  // dLoss/dinput. Parameter gradients are accumulated, not overwritten.
  Tensor backward(const ForwardPass& pass, const Tensor& grad_logits);

  // dLoss/dinput only; parameter gradients are not touched.
  Tensor input_backward(const ForwardPass& pass, const Tensor& grad_logits) const;

 private:
  Tensor backward_impl(const ForwardPass& pass, const Tensor& grad_logits,
                       ParamSet* grads) const;

  Shape sample_shape_;
  std::vector<Layer> layers_;
  ParamSet params_;
};

struct LossAndProbs {
  double loss = 0.0;  // batch mean of -sum_k t_k log p_k
  Tensor probs;       // softmax of this forward pass
};

// Floor applied to probabilities before taking logs in every cross-entropy.
inline constexpr double kLogFloor = 1e-12;

// Forward pass, mean soft-target cross-entropy against `targets` ([n x K],
// rows summing to one), and backward pass. Parameter gradients are reset and
// then populated.
LossAndProbs forward_backward(Network& net, const Tensor& batch,
                              const Tensor& targets);

// dLoss/dinput for the same loss; parameters and their gradients are left
// untouched.
Tensor input_gradient(const Network& net, const Tensor& batch,
                      const Tensor& targets);

// (probs - targets) / n: gradient of the batch-mean soft cross-entropy with
// respect to the logits.
Tensor soft_ce_logits_gradient(const Tensor& probs, const Tensor& targets);

// Mean cross-entropy of `targets` against the network's softmax output.
double batch_loss(const Network& net, const Tensor& batch, const Tensor& targets);

// One-hot [n x K] rows built from class indices.
Tensor one_hot(std::span<const int> labels, std::size_t num_classes);

}  // namespace ols
