// Copyright 2026 The OLS Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "ols/attack.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ols/errors.h"
#include "ols/trainer.h"

namespace ols {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Pulls v toward x until |v - x| <= eps holds in floating point; x + eps can
// round to a point just outside the ball.
double into_ball(double v, double x, double eps) {
  v = std::clamp(v, x - eps, x + eps);
  while (std::abs(v - x) > eps) v = std::nextafter(v, x);
  return v;
}

Tensor hard_input_gradient(const Network& net, const Tensor& x,
                           std::span<const int> y) {
  const ForwardPass pass = net.forward(x);
  const Tensor probs = pass.probs();
  return net.input_backward(pass,
                            soft_ce_logits_gradient(probs, one_hot(y, probs.dim(1))));
}

}  // namespace

std::string to_string(AttackMethod m) {
  return m == AttackMethod::kFgsm ? "fgsm" : "pgd";
}

AttackMethod parse_attack_method(const std::string& tag) {
  if (tag == "fgsm") return AttackMethod::kFgsm;
  if (tag == "pgd") return AttackMethod::kPgd;
  throw ConfigError("unknown attack method '" + tag + "' (expected fgsm or pgd)");
}

AttackConfig AttackConfig::fgsm(double eps) {
  AttackConfig c;
  c.method = AttackMethod::kFgsm;
  c.step = eps;
  c.epsilon = eps;
  c.iterations = 1;
  return c;
}

AttackConfig AttackConfig::pgd(double eps, int iterations, bool random_start,
                               std::uint64_t seed) {
  AttackConfig c;
  c.method = AttackMethod::kPgd;
  c.step = eps / 4.0;
  c.epsilon = eps;
  c.iterations = iterations;
  c.random_start = random_start;
  c.seed = seed;
  return c;
}

void AttackConfig::validate() const {
  if (!(step >= 0.0) || !std::isfinite(step)) {
    throw ConfigError("attack step must be a finite value >= 0");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("attack epsilon must be a finite value >= 0");
  }
  if (iterations < 1) throw ConfigError("attack iterations must be >= 1");
  if (!(lo <= hi)) throw ConfigError("attack range needs lo <= hi");
  if (method == AttackMethod::kFgsm) {
    if (iterations != 1) throw ConfigError("fgsm takes exactly one iteration");
    if (step != epsilon) throw ConfigError("fgsm needs step == epsilon");
    if (random_start) throw ConfigError("fgsm has no random start");
  }
}

Tensor fgsm_attack(const Network& net, const Tensor& x, std::span<const int> y,
                   const AttackConfig& cfg) {
  cfg.validate();
  if (cfg.method != AttackMethod::kFgsm) {
    throw ConfigError("fgsm_attack called with a pgd config");
  }
  const Tensor g = hard_input_gradient(net, x, y);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(into_ball(x[i] + cfg.step * sign(g[i]), x[i], cfg.epsilon),
                        cfg.lo, cfg.hi);
  }
  return out;
}

Tensor pgd_attack(const Network& net, const Tensor& x, std::span<const int> y,
                  const AttackConfig& cfg) {
  cfg.validate();
  if (cfg.method != AttackMethod::kPgd) {
    throw ConfigError("pgd_attack called with an fgsm config");
  }
  auto project = [&](std::size_t i, double v) {
    return std::clamp(into_ball(v, x[i], cfg.epsilon), cfg.lo, cfg.hi);
  };
  Tensor cur = x;
  if (cfg.random_start && cfg.epsilon > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-cfg.epsilon, cfg.epsilon);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = project(i, x[i] + u(rng));
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    const Tensor g = hard_input_gradient(net, cur, y);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = project(i, cur[i] + cfg.step * sign(g[i]));
    }
  }
  return cur;
}

RobustResult robust_error(const Network& net, const Dataset& ds,
                          const AttackConfig& cfg, std::size_t batch_size) {
  cfg.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  const std::size_t n = ds.size();
  const std::size_t w = ds.features.row_size();
  RobustResult r;
  r.adversarial = Tensor(ds.features.shape());
  Shape chunk_shape = ds.features.shape();
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t m = std::min(batch_size, n - start);
    chunk_shape[0] = m;
    Tensor chunk(chunk_shape,
                 std::vector<double>(ds.features.values().begin() + start * w,
                                     ds.features.values().begin() + (start + m) * w));
    const std::span<const int> labels(ds.labels.data() + start, m);
    AttackConfig c = cfg;
    c.seed = cfg.seed + start;  // distinct start noise per chunk
    const Tensor adv = cfg.method == AttackMethod::kFgsm
                           ? fgsm_attack(net, chunk, labels, c)
                           : pgd_attack(net, chunk, labels, c);
    std::copy(adv.values().begin(), adv.values().end(),
              r.adversarial.data().begin() + start * w);
  }
  r.top1_error = topk_error(predict_all(net, r.adversarial, batch_size), ds.labels, 1);
  return r;
}

}  // namespace ols
