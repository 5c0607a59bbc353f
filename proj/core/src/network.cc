// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/network.h"

#include <algorithm>
#include <cmath>

#include "ols/errors.h"

namespace ols {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void expect_rank(const Tensor& t, std::size_t rank, const char* layer) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(layer) + " expects rank " +
                         std::to_string(rank) + " input, got " +
                         to_string(t.shape()));
  }
}

Tensor linear_forward(const LinearLayer& l, const ParamSet& ps, const Tensor& x) {
  expect_rank(x, 2, "linear");
  if (x.dim(1) != l.in) {
    throw DimensionError("linear expects [n x " + std::to_string(l.in) +
                         "], got " + to_string(x.shape()));
  }
  const Tensor& w = ps[l.weight].value;
  const Tensor& b = ps[l.bias].value;
  const std::size_t n = x.dim(0);
  Tensor y({n, l.out});
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data().data() + i * l.in;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* wo = w.data().data() + o * l.in;
      double acc = b[o];
      for (std::size_t k = 0; k < l.in; ++k) acc += xi[k] * wo[k];
      y.at(i, o) = acc;
    }
  }
  return y;
}

// `grads` is null when only the input gradient is wanted.
Tensor linear_backward(const LinearLayer& l, const ParamSet& ps, ParamSet* grads,
                       const Tensor& x, const Tensor& g) {
  const Tensor& w = ps[l.weight].value;
  const std::size_t n = x.dim(0);
  Tensor dx(x.shape());
  const bool params = grads != nullptr;
  double* dw = params ? (*grads)[l.weight].grad.data().data() : nullptr;
  double* db = params ? (*grads)[l.bias].grad.data().data() : nullptr;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data().data() + i * l.in;
    double* dxi = dx.data().data() + i * l.in;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double go = g.at(i, o);
      const double* wo = w.data().data() + o * l.in;
      for (std::size_t k = 0; k < l.in; ++k) dxi[k] += go * wo[k];
      if (params) {
        double* dwo = dw + o * l.in;
        for (std::size_t k = 0; k < l.in; ++k) dwo[k] += go * xi[k];
        db[o] += go;
      }
    }
  }
  return dx;
}

Tensor conv_forward(const Conv2dLayer& l, const ParamSet& ps, const Tensor& x) {
  expect_rank(x, 4, "conv2d");
  if (x.dim(1) != l.in_channels) {
    throw DimensionError("conv2d expects " + std::to_string(l.in_channels) +
                         " channels, got " + to_string(x.shape()));
  }
  const std::size_t n = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t k = l.kernel, p = l.padding;
  if (h + 2 * p < k || wd + 2 * p < k) {
    throw DimensionError("conv2d kernel larger than padded input " +
                         to_string(x.shape()));
  }
  const std::size_t oh = h + 2 * p - k + 1, ow = wd + 2 * p - k + 1;
  const Tensor& w = ps[l.weight].value;
  const Tensor& b = ps[l.bias].value;
  Tensor y({n, l.out_channels, oh, ow});
  const double* xd = x.data().data();
  const double* wdp = w.data().data();
  double* yd = y.data().data();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < l.out_channels; ++o) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b[o];
          for (std::size_t c = 0; c < c_in; ++c) {
            for (std::size_t u = 0; u < k; ++u) {
              const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i + u) -
                                        static_cast<std::ptrdiff_t>(p);
              if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t v = 0; v < k; ++v) {
                const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j + v) -
                                          static_cast<std::ptrdiff_t>(p);
                if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(wd)) continue;
                acc += xd[((s * c_in + c) * h + ii) * wd + jj] *
                       wdp[((o * c_in + c) * k + u) * k + v];
              }
            }
          }
          yd[((s * l.out_channels + o) * oh + i) * ow + j] = acc;
        }
      }
    }
  }
  return y;
}

Tensor conv_backward(const Conv2dLayer& l, const ParamSet& ps, ParamSet* grads,
                     const Tensor& x, const Tensor& g) {
  const std::size_t n = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t k = l.kernel, p = l.padding;
  const std::size_t oh = g.dim(2), ow = g.dim(3);
  const bool params = grads != nullptr;
  const double* xd = x.data().data();
  const double* wdp = ps[l.weight].value.data().data();
  double* dw = params ? (*grads)[l.weight].grad.data().data() : nullptr;
  double* db = params ? (*grads)[l.bias].grad.data().data() : nullptr;
  const double* gd = g.data().data();
  Tensor dx(x.shape());
  double* dxd = dx.data().data();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < l.out_channels; ++o) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          const double go = gd[((s * l.out_channels + o) * oh + i) * ow + j];
          if (params) db[o] += go;
          for (std::size_t c = 0; c < c_in; ++c) {
            for (std::size_t u = 0; u < k; ++u) {
              const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i + u) -
                                        static_cast<std::ptrdiff_t>(p);
              if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t v = 0; v < k; ++v) {
                const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j + v) -
                                          static_cast<std::ptrdiff_t>(p);
                if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(wd)) continue;
                const std::size_t xi = ((s * c_in + c) * h + ii) * wd + jj;
                const std::size_t wi = ((o * c_in + c) * k + u) * k + v;
                dxd[xi] += go * wdp[wi];
                if (params) dw[wi] += go * xd[xi];
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

Tensor pool_forward(const Tensor& x, std::vector<std::size_t>& argmax_out) {
  expect_rank(x, 4, "maxpool2");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) {
    throw DimensionError("maxpool2 input too small: " + to_string(x.shape()));
  }
  Tensor y({n, c, oh, ow});
  argmax_out.assign(y.size(), 0);
  const double* xd = x.data().data();
  std::size_t out = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t base = (s * c + ch) * h * w;
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j, ++out) {
          std::size_t best = base + (2 * i) * w + 2 * j;
          for (std::size_t u = 0; u < 2; ++u) {
            for (std::size_t v = 0; v < 2; ++v) {
              const std::size_t idx = base + (2 * i + u) * w + 2 * j + v;
              if (xd[idx] > xd[best]) best = idx;
            }
          }
          y[out] = xd[best];
          argmax_out[out] = best;
        }
      }
    }
  }
  return y;
}

}  // namespace

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (find(name) != nullptr) {
    throw ConfigError("duplicate parameter name: " + name);
  }
  Param p;
  p.name = std::move(name);
  p.grad = Tensor(value.shape());
  p.momentum = Tensor(value.shape());
  p.value = std::move(value);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

Param* ParamSet::find(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Param* ParamSet::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void Network::add_linear(std::size_t in, std::size_t out) {
  const std::size_t idx = layers_.size();
  LinearLayer l;
  l.in = in;
  l.out = out;
  l.weight = params_.add("layer" + std::to_string(idx) + ".weight",
                         Tensor({out, in}));
  l.bias = params_.add("layer" + std::to_string(idx) + ".bias", Tensor({out}));
  layers_.emplace_back(l);
}

void Network::add_conv2d(std::size_t in_channels, std::size_t out_channels,
                         std::size_t kernel, std::size_t padding) {
  const std::size_t idx = layers_.size();
  Conv2dLayer l;
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.kernel = kernel;
  l.padding = padding;
  l.weight = params_.add("layer" + std::to_string(idx) + ".weight",
                         Tensor({out_channels, in_channels, kernel, kernel}));
  l.bias = params_.add("layer" + std::to_string(idx) + ".bias",
                       Tensor({out_channels}));
  layers_.emplace_back(l);
}

ForwardPass Network::forward(const Tensor& batch) const {
  const Shape& s = batch.shape();
  if (s.size() != sample_shape_.size() + 1 ||
      !std::equal(sample_shape_.begin(), sample_shape_.end(), s.begin() + 1)) {
    throw DimensionError("batch shape " + to_string(s) +
                         " does not match network input [n x " +
                         to_string(sample_shape_) + "]");
  }
  ForwardPass pass;
  pass.inputs.reserve(layers_.size() + 1);
  pass.inputs.push_back(batch);
  for (const Layer& layer : layers_) {
    const Tensor& x = pass.inputs.back();
    Tensor y = std::visit(
        Overloaded{
            [&](const LinearLayer& l) { return linear_forward(l, params_, x); },
            [&](const Conv2dLayer& l) { return conv_forward(l, params_, x); },
            [&](const ReluLayer&) {
              Tensor out = x;
              for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
              return out;
            },
            [&](const MaxPool2Layer&) {
              pass.pool_argmax.emplace_back();
              return pool_forward(x, pass.pool_argmax.back());
            },
            [&](const FlattenLayer&) {
              return x.reshaped({x.dim(0), x.row_size()});
            },
        },
        layer);
    pass.inputs.push_back(std::move(y));
  }
  return pass;
}

Tensor Network::backward(const ForwardPass& pass, const Tensor& grad_logits) {
  return backward_impl(pass, grad_logits, &params_);
}

Tensor Network::input_backward(const ForwardPass& pass,
                               const Tensor& grad_logits) const {
  return backward_impl(pass, grad_logits, nullptr);
}

Tensor Network::backward_impl(const ForwardPass& pass, const Tensor& grad_logits,
                              ParamSet* grads) const {
  if (grad_logits.shape() != pass.logits().shape()) {
    throw DimensionError("gradient shape " + to_string(grad_logits.shape()) +
                         " does not match logits " +
                         to_string(pass.logits().shape()));
  }
  Tensor g = grad_logits;
  std::size_t pool = pass.pool_argmax.size();
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Tensor& x = pass.inputs[li];
    g = std::visit(
        Overloaded{
            [&](const LinearLayer& l) {
              return linear_backward(l, params_, grads, x, g);
            },
            [&](const Conv2dLayer& l) {
              return conv_backward(l, params_, grads, x, g);
            },
            [&](const ReluLayer&) {
              Tensor dx = g;
              for (std::size_t i = 0; i < dx.size(); ++i) {
                if (!(x[i] > 0.0)) dx[i] = 0.0;
              }
              return dx;
            },
            [&](const MaxPool2Layer&) {
              const auto& am = pass.pool_argmax[--pool];
              Tensor dx(x.shape());
              for (std::size_t i = 0; i < am.size(); ++i) dx[am[i]] += g[i];
              return dx;
            },
            [&](const FlattenLayer&) { return g.reshaped(x.shape()); },
        },
        layers_[li]);
  }
  return g;
}

namespace {

double mean_soft_ce(const Tensor& probs, const Tensor& targets) {
  const std::size_t n = probs.dim(0), k = probs.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double li = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double t = targets.at(i, c);
      if (t != 0.0) li -= t * std::log(std::max(probs.at(i, c), kLogFloor));
    }
    total += li;
  }
  return total / static_cast<double>(n);
}

void check_targets(const Tensor& logits, const Tensor& targets) {
  if (targets.shape() != logits.shape()) {
    throw DimensionError("targets " + to_string(targets.shape()) +
                         " do not match logits " + to_string(logits.shape()));
  }
}

}  // namespace

Tensor soft_ce_logits_gradient(const Tensor& probs, const Tensor& targets) {
  if (probs.shape() != targets.shape()) {
    throw DimensionError("targets " + to_string(targets.shape()) +
                         " do not match probabilities " + to_string(probs.shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(probs.dim(0));
  Tensor g(probs.shape());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (probs[i] - targets[i]) * inv_n;
  }
  return g;
}

LossAndProbs forward_backward(Network& net, const Tensor& batch,
                              const Tensor& targets) {
  ForwardPass pass = net.forward(batch);
  check_targets(pass.logits(), targets);
  LossAndProbs out;
  out.probs = pass.probs();
  out.loss = mean_soft_ce(out.probs, targets);
  net.params().zero_grad();
  net.backward(pass, soft_ce_logits_gradient(out.probs, targets));
  return out;
}

Tensor input_gradient(const Network& net, const Tensor& batch,
                      const Tensor& targets) {
  ForwardPass pass = net.forward(batch);
  check_targets(pass.logits(), targets);
  return net.input_backward(pass, soft_ce_logits_gradient(pass.probs(), targets));
}

double batch_loss(const Network& net, const Tensor& batch, const Tensor& targets) {
  ForwardPass pass = net.forward(batch);
  check_targets(pass.logits(), targets);
  return mean_soft_ce(pass.probs(), targets);
}

Tensor one_hot(std::span<const int> labels, std::size_t num_classes) {
  Tensor t({labels.size(), num_classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw IndexError("label " + std::to_string(labels[i]) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
    t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return t;
}

}  // namespace ols
