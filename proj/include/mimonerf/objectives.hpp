// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives: per-ray pixel losses, the pairwise 3D consistency
// loss with stop-gradient and asymmetric weights, and the reformulation
// presets with their run-budget rules.

#pragma once

#include <string>
#include <vector>

#include "mimonerf/common.hpp"

namespace mimonerf {

// One reformulated evaluation of the field: group shift + repetition count.
struct ReformEntry {
  int repeat = 1;        // R, must divide n_p
  bool resample_shift = true;
  int fixed_shift = 0;   // used when resample_shift is false

  int window(int n_p) const { return n_p / repeat; }
};

struct ReformulationConfig {
  std::vector<ReformEntry> entries;
  double lambda = 1.0;

  int size() const { return static_cast<int>(entries.size()); }
  int r_max() const {
    int m = 1;
    for (const auto& e : entries) m = std::max(m, e.repeat);
    return m;
  }
  // Per-ray MLP invocations for one pass of n samples, before any padding
  // surcharge: sum_m n * R^m / n_p.
  int64_t base_runs_per_pass(int n_samples, int n_p) const {
    int64_t total = 0;
    for (const auto& e : entries) total += static_cast<int64_t>(n_samples) / e.window(n_p);
    return total;
  }
};

ReformulationConfig base_formulation(double lambda = 0.0);

// Named presets. Shifts are always resampled per iteration with distinct
// values per window size.
ReformulationConfig make_preset(const std::string& name, int n_p, double lambda);

// Custom schedules: comma list of R values, each optionally pinned to a
// shift with "@s", e.g. "1,2" or "1@0,1@2".
ReformulationConfig parse_reformulations(const std::string& text, int n_p, double lambda);

void validate_reformulations(const ReformulationConfig& cfg, int n_p);

// Asymmetric consistency weight mu_{m_i}^{m_j} = sqrt(R^{m_j}) /
// (sqrt(R^max) sqrt(R^{m_i})): branches with higher repetition are treated
// as more reliable and pulled on less.
inline double mu_weight(int r_i, int r_j, int r_max) {
  if (r_i < 1 || r_j < 1 || r_max < std::max(r_i, r_j))
    throw UsageError("mu_weight: invalid repetition counts");
  return std::sqrt(static_cast<double>(r_j)) /
         (std::sqrt(static_cast<double>(r_max)) * std::sqrt(static_cast<double>(r_i)));
}

// Squared L2 over RGB for one ray.
template <class T>
T pixel_loss(const Vec3<T>& predicted, const Vec3<T>& target) {
  return (predicted - target).squaredNorm();
}

template <class T>
T mimo_pixel_loss(const std::vector<Vec3<T>>& predicted, const Vec3<T>& target) {
  if (predicted.empty()) throw UsageError("mimo_pixel_loss: need at least one prediction");
  T total = T(0);
  for (const auto& p : predicted) total += pixel_loss(p, target);
  return total;
}

template <class T>
T full_objective(T pixel_term, T consistency_term, T lambda) {
  if (lambda < T(0)) throw UsageError("full_objective: lambda must be >= 0");
  return pixel_term + lambda * consistency_term;
}

// Per-sample records of one ray pass for all reformulations, aligned on the
// shared sample grid. color[m] points at an n x 3 row-major block, alpha[m]
// at n values. mask[i] != 0 marks samples excluded from the loss.
template <class T>
struct PerSampleRecord {
  std::vector<const T*> color;  // [M]
  std::vector<const T*> alpha;  // [M]
  std::vector<int> repeat;      // [M]
  int n = 0;
  const uint8_t* mask = nullptr;
};

// L_3D = L_color + L_alpha: for every pair m1 < m2, mu-weighted squared
// differences with stop-gradient on the opposing branch, averaged over n.
// The value is returned; gradients flow through accumulate_consistency_grads.
template <class T>
T consistency_loss(const PerSampleRecord<T>& rec) {
  const int m_count = static_cast<int>(rec.color.size());
  if (m_count < 2) return T(0);
  int r_max = 1;
  for (int r : rec.repeat) r_max = std::max(r_max, r);
  T total = T(0);
  for (int m1 = 0; m1 < m_count; ++m1) {
    for (int m2 = m1 + 1; m2 < m_count; ++m2) {
      const T mu12 = static_cast<T>(mu_weight(rec.repeat[m1], rec.repeat[m2], r_max));
      const T mu21 = static_cast<T>(mu_weight(rec.repeat[m2], rec.repeat[m1], r_max));
      T color_sq = T(0);
      T alpha_sq = T(0);
      for (int i = 0; i < rec.n; ++i) {
        if (rec.mask && rec.mask[i]) continue;
        for (int c = 0; c < 3; ++c) {
          const T dc = rec.color[m1][3 * i + c] - rec.color[m2][3 * i + c];
          color_sq += dc * dc;
        }
        const T da = rec.alpha[m1][i] - rec.alpha[m2][i];
        alpha_sq += da * da;
      }
      total += (mu12 + mu21) * (color_sq + alpha_sq) / static_cast<T>(rec.n);
    }
  }
  return total;
}

// Adds scale * dL_3D/d(record) into the per-reformulation gradient buffers
// (same layout as the records). Stop-gradient: branch m1 receives gradient
// only through the term where m2 is frozen, and vice versa.
template <class T>
void accumulate_consistency_grads(const PerSampleRecord<T>& rec, T scale,
                                  const std::vector<T*>& d_color,
                                  const std::vector<T*>& d_alpha) {
  const int m_count = static_cast<int>(rec.color.size());
  if (m_count < 2) return;
  int r_max = 1;
  for (int r : rec.repeat) r_max = std::max(r_max, r);
  const T inv_n = T(1) / static_cast<T>(rec.n);
  for (int m1 = 0; m1 < m_count; ++m1) {
    for (int m2 = m1 + 1; m2 < m_count; ++m2) {
      const T c12 = T(2) * static_cast<T>(mu_weight(rec.repeat[m1], rec.repeat[m2], r_max)) *
                    inv_n * scale;
      const T c21 = T(2) * static_cast<T>(mu_weight(rec.repeat[m2], rec.repeat[m1], r_max)) *
                    inv_n * scale;
      for (int i = 0; i < rec.n; ++i) {
        if (rec.mask && rec.mask[i]) continue;
        for (int c = 0; c < 3; ++c) {
          const T dc = rec.color[m1][3 * i + c] - rec.color[m2][3 * i + c];
          d_color[m1][3 * i + c] += c12 * dc;
          d_color[m2][3 * i + c] -= c21 * dc;
        }
        const T da = rec.alpha[m1][i] - rec.alpha[m2][i];
        d_alpha[m1][i] += c12 * da;
        d_alpha[m2][i] -= c21 * da;
      }
    }
  }
}

// Distillation consistency for one ray pass: the teacher branch is always
// frozen and mu = 1. Returns the loss; adds scale * dL/d(student) into the
// student buffers.
template <class T>
T distill_consistency(const T* c_student, const T* a_student, const T* c_teacher,
                      const T* a_teacher, int n, T scale, T* d_color, T* d_alpha) {
  T total = T(0);
  const T inv_n = T(1) / static_cast<T>(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const T dc = c_student[3 * i + c] - c_teacher[3 * i + c];
      total += dc * dc;
      if (d_color) d_color[3 * i + c] += T(2) * scale * inv_n * dc;
    }
    const T da = a_student[i] - a_teacher[i];
    total += da * da;
    if (d_alpha) d_alpha[i] += T(2) * scale * inv_n * da;
  }
  return total * inv_n;
}

}  // namespace mimonerf
