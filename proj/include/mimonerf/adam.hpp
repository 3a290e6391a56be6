// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "mimonerf/mlp.hpp"

namespace mimonerf {

struct AdamHyper {
  float lr = 5e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

struct AdamState {
  NetParams<float> m;
  NetParams<float> v;
  int64_t t = 0;
  AdamHyper hyper;
};

inline AdamState adam_init(const NetParams<float>& params, const AdamHyper& hyper = {}) {
  AdamState s;
  s.m.zero_like(params);
  s.v.zero_like(params);
  s.t = 0;
  s.hyper = hyper;
  return s;
}

// Standard bias-corrected Adam update, in place.
inline void adam_step(NetParams<float>& params, const NetParams<float>& grads, AdamState& state) {
  if (params.w.size() != grads.w.size())
    throw UsageError("adam_step: parameter/gradient shape mismatch");
  for (size_t i = 0; i < grads.w.size(); ++i) {
    if (!grads.w[i].allFinite() || !grads.b[i].allFinite())
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(i));
  }
  state.t += 1;
  const float b1 = state.hyper.beta1;
  const float b2 = state.hyper.beta2;
  const float corr1 = 1.0f - std::pow(b1, static_cast<float>(state.t));
  const float corr2 = 1.0f - std::pow(b2, static_cast<float>(state.t));
  const float step = state.hyper.lr / corr1;
  const float eps = state.hyper.eps;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0f - b1) * g;
    v.array() = b2 * v.array() + (1.0f - b2) * g.array().square();
    p.array() -= step * m.array() / ((v.array() / corr2).sqrt() + eps);
  };
  for (size_t i = 0; i < params.w.size(); ++i) {
    update(params.w[i], grads.w[i], state.m.w[i], state.v.w[i]);
    update(params.b[i], grads.b[i], state.m.b[i], state.v.b[i]);
  }
}

}  // namespace mimonerf
