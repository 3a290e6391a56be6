// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable volume compositing: C = sum_i T_i alpha_i c_i with
// T_i = prod_{j<i} (1 - alpha_j), alpha_i = 1 - exp(-sigma_i delta_i).

#pragma once

#include <atomic>

#include "mimonerf/common.hpp"

namespace mimonerf {

template <class T>
T alpha_from_sigma(T sigma, T delta) {
  // The transmittance factor is kept strictly positive even when exp
  // underflows, so alpha stays in [0, 1) and the reverse pass's 1/(1-alpha)
  // stays finite.
  constexpr T kFloor = T(16) * std::numeric_limits<T>::epsilon();
  return T(1) - std::max(std::exp(-sigma * delta), kFloor);
}

// d(alpha)/d(sigma) = delta * exp(-sigma delta) = delta * (1 - alpha).
template <class T>
T d_sigma_from_d_alpha(T d_alpha, T delta, T alpha) {
  return d_alpha * delta * (T(1) - alpha);
}

template <class T>
struct CompositeResult {
  Vec3<T> color = Vec3<T>::Zero();  // volume term only, before background
  VecX<T> weights;                  // T_i * alpha_i, zero on masked slots
  T transmittance = T(1);           // after the last sample

  // 1 - prod(1 - alpha_j): algebraically equal to sum(weights) and bounded
  // in [0, 1] by construction.
  T weight_sum() const { return T(1) - transmittance; }
};

// Tracks the compositing invariants across a run. add() is called once per
// composited ray pass; violations stay zero for any valid field output.
struct CompositeMonitor {
  std::atomic<uint64_t> rays{0};
  std::atomic<uint64_t> alpha_violations{0};
  std::atomic<uint64_t> weight_violations{0};

  template <class T>
  void add(const CompositeResult<T>& r) {
    rays.fetch_add(1, std::memory_order_relaxed);
    bool weight_bad = false;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
      if (!(r.weights[i] >= T(0))) weight_bad = true;
      sum += static_cast<double>(r.weights[i]);
    }
    const double bound = static_cast<double>(r.weight_sum());
    if (!(bound >= 0.0) || !(bound <= 1.0) || sum < -1e-6 || sum > 1.0 + 1e-5) weight_bad = true;
    if (weight_bad) weight_violations.fetch_add(1, std::memory_order_relaxed);
  }
  void flag_alpha() { alpha_violations.fetch_add(1, std::memory_order_relaxed); }
  uint64_t total_violations() const { return alpha_violations + weight_violations; }
};

template <class T>
CompositeResult<T> composite(const MatX<T>& colors, const VecX<T>& alphas,
                             const uint8_t* mask = nullptr, CompositeMonitor* monitor = nullptr) {
  const Eigen::Index n = alphas.size();
  if (colors.rows() != n || colors.cols() != 3)
    throw UsageError("composite: colors/alphas length mismatch");
  CompositeResult<T> r;
  r.weights.setZero(n);
  T trans = T(1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask && mask[i]) continue;
    const T a = alphas[i];
    if (monitor && !(a >= T(0) && a < T(1))) monitor->flag_alpha();
    const T w = trans * a;
    r.weights[i] = w;
    r.color += w * colors.row(i).transpose();
    trans *= (T(1) - a);
  }
  r.transmittance = trans;
  if (monitor) monitor->add(r);
  return r;
}

template <class T>
Vec3<T> composite_with_background(const CompositeResult<T>& r, const Vec3<T>& background) {
  return r.color + r.transmittance * background;
}

// Exact reverse pass of composite_with_background w.r.t. colors and alphas,
// given dL/d(final color).
template <class T>
void composite_backward(const MatX<T>& colors, const VecX<T>& alphas, const uint8_t* mask,
                        const Vec3<T>& background, const Vec3<T>& d_color_out, MatX<T>& d_colors,
                        VecX<T>& d_alphas) {
  const Eigen::Index n = alphas.size();
  d_colors.setZero(n, 3);
  d_alphas.setZero(n);
  // Prefix transmittances.
  VecX<T> trans(n);
  T t = T(1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask && mask[i]) {
      trans[i] = t;
      continue;
    }
    trans[i] = t;
    t *= (T(1) - alphas[i]);
  }
  // suffix = sum_{j>i} w_j c_j + T_end * background, accumulated backwards.
  Vec3<T> suffix = t * background;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (mask && mask[i]) continue;
    const T w = trans[i] * alphas[i];
    d_colors.row(i) = (w * d_color_out).transpose();
    const Vec3<T> dC_da =
        trans[i] * colors.row(i).transpose() - suffix / (T(1) - alphas[i]);
    d_alphas[i] = d_color_out.dot(dC_da);
    suffix += w * colors.row(i).transpose();
  }
}

}  // namespace mimonerf
