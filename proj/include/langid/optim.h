// langid/optim.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_OPTIM_H_
#define LANGID_OPTIM_H_

#include <cmath>
#include <numbers>
#include <vector>

#include "langid/nn/tensor.h"

namespace langid {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates for every trainable tensor, in parameter
/// order.
template <typename T>
struct AdamState {
  long step = 0;
  std::vector<std::vector<T>> m, v;
};

/// One Adam update with decoupled weight decay:
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
/// Fails on a non-finite gradient, naming the tensor.
template <typename T>
void AdamStep(ParameterSet<T> &params, AdamState<T> &state, double lr, double weight_decay,
              const AdamConfig &cfg = {}) {
  auto &entries = params.entries();
  if (state.m.empty()) {
    state.m.resize(entries.size());
    state.v.resize(entries.size());
    for (size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].trainable) continue;
      state.m[i].assign(entries[i].value.size(), T(0));
      state.v[i].assign(entries[i].value.size(), T(0));
    }
  }
  Check(state.m.size() == entries.size(), "optimizer state does not match parameters");
  for (const auto &e : entries) {
    if (!e.trainable) continue;
    for (T g : e.grad.data)
      if (!std::isfinite(g)) Fail("non-finite gradient in ", e.name, " at step ", state.step + 1);
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < entries.size(); ++i) {
    auto &e = entries[i];
    if (!e.trainable) continue;
    auto &m = state.m[i];
    auto &v = state.v[i];
    for (size_t k = 0; k < e.value.size(); ++k) {
      const double g = e.grad.data[k];
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double mhat = mk / bc1;
      const double vhat = vk / bc2;
      const double p = e.value.data[k];
      e.value.data[k] =
          static_cast<T>(p - lr * (mhat / (std::sqrt(vhat) + cfg.eps) + weight_decay * p));
    }
  }
}

/// Linear warmup from 0 over floor(warmup_ratio * total_steps) steps, then
/// cosine annealing from base_lr down to min_lr at total_steps.
inline double CosineLr(long step, long total_steps, double base_lr, double min_lr,
                       double warmup_ratio) {
  Check(total_steps > 0 && step >= 0 && step <= total_steps, "lr step ", step,
        " outside [0, ", total_steps, "]");
  const long warmup = static_cast<long>(std::floor(warmup_ratio * total_steps));
  if (step < warmup) return base_lr * static_cast<double>(step) / warmup;
  if (step == warmup) return base_lr;
  const long span = total_steps - warmup;
  const double tau = span > 0 ? static_cast<double>(step - warmup) / span : 1.0;
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * tau));
}

}  // namespace langid

#endif  // LANGID_OPTIM_H_
