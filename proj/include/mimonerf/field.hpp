// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Radiance field heads: positional encoding + MLP + output activations, in
// single-sample (SISO) and grouped (MIMO) form. The MIMO head orders its
// outputs (c_1..c_np, sigma_1..sigma_np).

#pragma once

#include <vector>

#include "mimonerf/encoding.hpp"
#include "mimonerf/grouping.hpp"
#include "mimonerf/mlp.hpp"

namespace mimonerf {

struct FieldConfig {
  MlpArchitecture arch;
  EncodingSpec pos_enc;
  EncodingSpec dir_enc;
};

inline FieldConfig make_field_config(int n_p, int hidden_width, int depth, int pos_freqs,
                                     int dir_freqs, bool use_pi = false) {
  FieldConfig cfg;
  cfg.pos_enc = EncodingSpec{pos_freqs, true, use_pi, 3};
  cfg.dir_enc = EncodingSpec{dir_freqs, true, use_pi, 3};
  cfg.arch.n_p = n_p;
  cfg.arch.main_input_dim = n_p * cfg.pos_enc.output_dim();
  cfg.arch.hidden_width = hidden_width;
  cfg.arch.depth = depth;
  if (depth >= 3) cfg.arch.skip_layers = {depth / 2};
  cfg.arch.aux_input_dim = cfg.dir_enc.output_dim();
  cfg.arch.color_hidden_width = std::max(hidden_width / 2, 1);
  cfg.arch.validate();
  return cfg;
}

template <class T>
struct FieldOutput {
  Vec3<T> color;  // componentwise in [0, 1]
  T sigma;        // >= 0
};

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

struct RunCounter {
  uint64_t count = 0;
  void add(uint64_t n) { count += n; }
};

template <class T>
void check_unit_direction(const Vec3<T>& d) {
  if (std::abs(d.norm() - T(1)) > T(1e-6)) throw UsageError("field: direction must be unit length");
}

// Repeats each window coordinate `repeat` times to fill the n_p MLP slots;
// slot q holds the coordinate of window index q / repeat.
template <class T>
MatX<T> variation_reduce(const MatX<T>& window_coords, int repeat) {
  if (repeat < 1) throw UsageError("variation_reduce: repeat must be >= 1");
  if (repeat == 1) return window_coords;
  MatX<T> out(window_coords.rows() * repeat, window_coords.cols());
  for (Eigen::Index j = 0; j < window_coords.rows(); ++j)
    for (int r = 0; r < repeat; ++r) out.row(j * repeat + r) = window_coords.row(j);
  return out;
}

// Arithmetic mean over each block of `repeat` post-activation outputs.
template <class T>
std::vector<FieldOutput<T>> average_repeats(const std::vector<FieldOutput<T>>& slots, int repeat) {
  if (repeat < 1 || slots.size() % repeat != 0)
    throw UsageError("average_repeats: repeat must divide the slot count");
  std::vector<FieldOutput<T>> out(slots.size() / repeat);
  for (size_t u = 0; u < out.size(); ++u) {
    Vec3<T> c = Vec3<T>::Zero();
    T s = T(0);
    for (int r = 0; r < repeat; ++r) {
      c += slots[u * repeat + r].color;
      s += slots[u * repeat + r].sigma;
    }
    out[u].color = c / T(repeat);
    out[u].sigma = s / T(repeat);
  }
  return out;
}

// One MLP invocation on a full group of n_p coordinates with a single shared
// direction. Returns per-slot outputs in slot order.
template <class T>
std::vector<FieldOutput<T>> field_mimo(const FieldConfig& cfg, const NetParams<T>& params,
                                       const MatX<T>& group_coords, const Vec3<T>& dir,
                                       RunCounter* counter = nullptr) {
  const int n_p = cfg.arch.n_p;
  if (group_coords.rows() != n_p || group_coords.cols() != 3)
    throw UsageError("field_mimo: expected n_p x 3 coordinates");
  check_unit_direction(dir);
  MatX<T> main_in(1, cfg.arch.main_input_dim);
  const int enc_dim = cfg.pos_enc.output_dim();
  for (int j = 0; j < n_p; ++j) {
    VecX<T> p = group_coords.row(j).transpose();
    positional_encode(cfg.pos_enc, p.data(), main_in.data() + j * enc_dim);
  }
  MatX<T> aux_in(1, cfg.arch.aux_input_dim);
  positional_encode(cfg.dir_enc, dir.data(), aux_in.data());
  MatX<T> raw = mlp_forward(cfg.arch, params, main_in, aux_in);
  if (counter) counter->add(1);
  std::vector<FieldOutput<T>> out(n_p);
  for (int j = 0; j < n_p; ++j) {
    for (int c = 0; c < 3; ++c) out[j].color[c] = sigmoid(raw(0, 3 * j + c));
    out[j].sigma = std::max(T(0), raw(0, 3 * n_p + j));
  }
  return out;
}

// Reference single-sample evaluation with plain scalar loops. This is the
// 64-bit oracle the grouped path is checked against; keep it free of the
// batched matrix code.
inline FieldOutput<double> field_siso(const FieldConfig& cfg, const NetParams<double>& params,
                                      const Vec3d& x, const Vec3d& dir,
                                      RunCounter* counter = nullptr) {
  if (cfg.arch.n_p != 1) throw UsageError("field_siso: config must have n_p == 1");
  check_unit_direction(dir);
  const auto linear = [&](const MatX<double>& w, const VecX<double>& b,
                          const std::vector<double>& in) {
    std::vector<double> out(static_cast<size_t>(w.rows()));
    for (Eigen::Index o = 0; o < w.rows(); ++o) {
      double acc = b[o];
      for (Eigen::Index i = 0; i < w.cols(); ++i) acc += w(o, i) * in[static_cast<size_t>(i)];
      out[static_cast<size_t>(o)] = acc;
    }
    return out;
  };
  const auto relu = [](std::vector<double>& v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  };

  std::vector<double> enc(static_cast<size_t>(cfg.pos_enc.output_dim()));
  positional_encode(cfg.pos_enc, x.data(), enc.data());
  std::vector<double> h = enc;
  for (int l = 0; l < cfg.arch.depth; ++l) {
    std::vector<double> in = h;
    if (l > 0 && cfg.arch.has_skip(l)) in.insert(in.end(), enc.begin(), enc.end());
    h = linear(params.w[l], params.b[l], in);
    relu(h);
  }
  std::vector<double> sigma_raw = linear(params.w[cfg.arch.sigma_index()],
                                         params.b[cfg.arch.sigma_index()], h);
  std::vector<double> feat = linear(params.w[cfg.arch.feature_index()],
                                    params.b[cfg.arch.feature_index()], h);
  std::vector<double> dir_enc(static_cast<size_t>(cfg.dir_enc.output_dim()));
  positional_encode(cfg.dir_enc, dir.data(), dir_enc.data());
  feat.insert(feat.end(), dir_enc.begin(), dir_enc.end());
  std::vector<double> ch = linear(params.w[cfg.arch.color_hidden_index()],
                                  params.b[cfg.arch.color_hidden_index()], feat);
  relu(ch);
  std::vector<double> rgb = linear(params.w[cfg.arch.color_out_index()],
                                   params.b[cfg.arch.color_out_index()], ch);
  if (counter) counter->add(1);
  FieldOutput<double> out;
  for (int c = 0; c < 3; ++c) out.color[c] = sigmoid(rgb[static_cast<size_t>(c)]);
  out.sigma = std::max(0.0, sigma_raw[0]);
  return out;
}

}  // namespace mimonerf
