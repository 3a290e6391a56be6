// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Fixed-topology radiance-field MLP with hand-written forward and reverse
// passes. The topology is the classic NeRF trunk: ReLU trunk with optional
// skip concatenations of the encoded position, a density head off the trunk,
// and a color branch that concatenates the encoded view direction. All
// outputs are pre-activation; output nonlinearities belong to the field
// layer.

#pragma once

#include <set>
#include <vector>

#include "mimonerf/common.hpp"

namespace mimonerf {

struct MlpArchitecture {
  int n_p = 1;              // grouped samples per invocation
  int main_input_dim = 0;   // n_p * per-sample position encoding dim
  int hidden_width = 0;
  int depth = 0;            // trunk layers
  std::vector<int> skip_layers;  // trunk layers whose input is [h | main_in]
  int aux_input_dim = 0;    // view-direction encoding dim
  int color_hidden_width = 0;

  int output_dim() const { return 4 * n_p; }
  int color_dim() const { return 3 * n_p; }

  bool has_skip(int layer) const {
    for (int s : skip_layers)
      if (s == layer) return true;
    return false;
  }

  // Tensor order: trunk 0..depth-1, feature, sigma, color_hidden, color_out.
  int tensor_count() const { return depth + 4; }
  int feature_index() const { return depth; }
  int sigma_index() const { return depth + 1; }
  int color_hidden_index() const { return depth + 2; }
  int color_out_index() const { return depth + 3; }

  int tensor_in_dim(int t) const {
    if (t == 0) return main_input_dim;
    if (t < depth) return has_skip(t) ? hidden_width + main_input_dim : hidden_width;
    if (t == feature_index() || t == sigma_index()) return hidden_width;
    if (t == color_hidden_index()) return hidden_width + aux_input_dim;
    return color_hidden_width;
  }
  int tensor_out_dim(int t) const {
    if (t < depth) return hidden_width;
    if (t == feature_index()) return hidden_width;
    if (t == sigma_index()) return n_p;
    if (t == color_hidden_index()) return color_hidden_width;
    return 3 * n_p;
  }

  void validate() const {
    if (depth < 1) throw UsageError("mlp: depth must be >= 1");
    if (hidden_width < 1 || main_input_dim < 1 || color_hidden_width < 1)
      throw UsageError("mlp: dimensions must be positive");
    if (n_p < 1) throw UsageError("mlp: n_p must be >= 1");
    for (int s : skip_layers)
      if (s <= 0 || s >= depth) throw UsageError("mlp: skip layer out of range");
  }

  bool operator==(const MlpArchitecture&) const = default;
};

template <class T>
struct NetParams {
  std::vector<MatX<T>> w;  // [out x in]
  std::vector<VecX<T>> b;

  void zero_like(const NetParams& other) {
    w.resize(other.w.size());
    b.resize(other.b.size());
    for (size_t i = 0; i < other.w.size(); ++i) {
      w[i].setZero(other.w[i].rows(), other.w[i].cols());
      b[i].setZero(other.b[i].size());
    }
  }

  void add(const NetParams& other) {
    for (size_t i = 0; i < w.size(); ++i) {
      w[i] += other.w[i];
      b[i] += other.b[i];
    }
  }

  size_t scalar_count() const {
    size_t n = 0;
    for (size_t i = 0; i < w.size(); ++i) n += w[i].size() + b[i].size();
    return n;
  }

  bool all_values_finite() const {
    for (size_t i = 0; i < w.size(); ++i)
      if (!w[i].allFinite() || !b[i].allFinite()) return false;
    return true;
  }
};

template <class Dst, class Src>
NetParams<Dst> cast_params(const NetParams<Src>& p) {
  NetParams<Dst> out;
  out.w.reserve(p.w.size());
  out.b.reserve(p.b.size());
  for (size_t i = 0; i < p.w.size(); ++i) {
    out.w.push_back(p.w[i].template cast<Dst>());
    out.b.push_back(p.b[i].template cast<Dst>());
  }
  return out;
}

template <class T>
bool params_bitwise_equal(const NetParams<T>& a, const NetParams<T>& b) {
  if (a.w.size() != b.w.size()) return false;
  for (size_t i = 0; i < a.w.size(); ++i) {
    if (a.w[i].rows() != b.w[i].rows() || a.w[i].cols() != b.w[i].cols()) return false;
    if (std::memcmp(a.w[i].data(), b.w[i].data(), sizeof(T) * a.w[i].size()) != 0) return false;
    if (a.b[i].size() != b.b[i].size()) return false;
    if (std::memcmp(a.b[i].data(), b.b[i].data(), sizeof(T) * a.b[i].size()) != 0) return false;
  }
  return true;
}

// Fan-in scaled uniform init, biases zero. Deterministic per seed.
inline NetParams<float> mlp_init(const MlpArchitecture& arch, uint64_t seed) {
  arch.validate();
  NetParams<float> p;
  p.w.resize(arch.tensor_count());
  p.b.resize(arch.tensor_count());
  for (int t = 0; t < arch.tensor_count(); ++t) {
    const int in = arch.tensor_in_dim(t);
    const int out = arch.tensor_out_dim(t);
    Rng rng = make_rng(seed, kStreamInit, static_cast<uint64_t>(t));
    const float bound = std::sqrt(6.0f / static_cast<float>(in));
    p.w[t].resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) p.w[t](r, c) = bound * (2.0f * rng.uniform_f() - 1.0f);
    p.b[t].setZero(out);
  }
  return p;
}

// Everything the reverse pass needs: actual layer inputs (including skip
// concatenations) and post-activation values for the ReLU masks.
template <class T>
struct ForwardTape {
  std::vector<MatX<T>> x;  // input to each trunk layer
  std::vector<MatX<T>> h;  // post-ReLU output of each trunk layer
  MatX<T> color_in;        // [feature | aux]
  MatX<T> color_h;         // post-ReLU color hidden
};

template <class T>
struct MlpGrads {
  NetParams<T> params;
  MatX<T> main_in;  // filled only when requested
};

template <class T>
MatX<T> mlp_forward(const MlpArchitecture& arch, const NetParams<T>& p, const MatX<T>& main_in,
                    const MatX<T>& aux_in, ForwardTape<T>* tape = nullptr) {
  const Eigen::Index n = main_in.rows();
  if (main_in.cols() != arch.main_input_dim || aux_in.cols() != arch.aux_input_dim ||
      aux_in.rows() != n)
    throw UsageError("mlp_forward: batch shape does not match architecture");
  if (!main_in.allFinite() || !aux_in.allFinite())
    throw NumericError("mlp_forward: non-finite input");

  if (tape) {
    tape->x.resize(arch.depth);
    tape->h.resize(arch.depth);
  }
  MatX<T> h;
  for (int l = 0; l < arch.depth; ++l) {
    MatX<T> x;
    if (l == 0) {
      x = main_in;
    } else if (arch.has_skip(l)) {
      x.resize(n, arch.hidden_width + arch.main_input_dim);
      x << h, main_in;
    } else {
      x = std::move(h);
    }
    h.noalias() = x * p.w[l].transpose();
    h.rowwise() += p.b[l].transpose();
    h = h.cwiseMax(T(0));
    if (tape) {
      tape->x[l] = std::move(x);
      tape->h[l] = h;
    }
  }

  MatX<T> color_in(n, arch.hidden_width + arch.aux_input_dim);
  {
    MatX<T> feat;
    feat.noalias() = h * p.w[arch.feature_index()].transpose();
    feat.rowwise() += p.b[arch.feature_index()].transpose();
    color_in << feat, aux_in;
  }
  MatX<T> color_h;
  color_h.noalias() = color_in * p.w[arch.color_hidden_index()].transpose();
  color_h.rowwise() += p.b[arch.color_hidden_index()].transpose();
  color_h = color_h.cwiseMax(T(0));

  MatX<T> raw(n, arch.output_dim());
  raw.leftCols(arch.color_dim()).noalias() = color_h * p.w[arch.color_out_index()].transpose();
  raw.leftCols(arch.color_dim()).rowwise() += p.b[arch.color_out_index()].transpose();
  raw.rightCols(arch.n_p).noalias() = h * p.w[arch.sigma_index()].transpose();
  raw.rightCols(arch.n_p).rowwise() += p.b[arch.sigma_index()].transpose();

  if (tape) {
    tape->color_in = std::move(color_in);
    tape->color_h = std::move(color_h);
  }
  return raw;
}

// Exact gradients of <d_raw, raw> w.r.t. parameters (and optionally the main
// input). ReLU subgradient at 0 is taken as 0.
template <class T>
void mlp_backward(const MlpArchitecture& arch, const NetParams<T>& p, const ForwardTape<T>& tape,
                  const MatX<T>& d_raw, MlpGrads<T>* out, bool want_input_grad = false) {
  const Eigen::Index n = d_raw.rows();
  if (d_raw.cols() != arch.output_dim())
    throw UsageError("mlp_backward: gradient shape mismatch");
  if (static_cast<int>(tape.h.size()) != arch.depth || tape.h[arch.depth - 1].rows() != n)
    throw UsageError("mlp_backward: tape does not match batch");

  NetParams<T>& g = out->params;
  if (g.w.size() != p.w.size()) g.zero_like(p);
  if (want_input_grad) out->main_in.setZero(n, arch.main_input_dim);

  const auto d_color = d_raw.leftCols(arch.color_dim());
  const auto d_sigma = d_raw.rightCols(arch.n_p);

  // Color branch.
  g.w[arch.color_out_index()].noalias() += d_color.transpose() * tape.color_h;
  g.b[arch.color_out_index()].noalias() += d_color.colwise().sum().transpose();
  MatX<T> d_ch;
  d_ch.noalias() = d_color * p.w[arch.color_out_index()];
  d_ch = d_ch.cwiseProduct((tape.color_h.array() > T(0)).template cast<T>().matrix());
  g.w[arch.color_hidden_index()].noalias() += d_ch.transpose() * tape.color_in;
  g.b[arch.color_hidden_index()].noalias() += d_ch.colwise().sum().transpose();
  MatX<T> d_cin;
  d_cin.noalias() = d_ch * p.w[arch.color_hidden_index()];
  const auto d_feat = d_cin.leftCols(arch.hidden_width);

  // Trunk heads.
  const MatX<T>& h_last = tape.h[arch.depth - 1];
  g.w[arch.feature_index()].noalias() += d_feat.transpose() * h_last;
  g.b[arch.feature_index()].noalias() += d_feat.colwise().sum().transpose();
  g.w[arch.sigma_index()].noalias() += d_sigma.transpose() * h_last;
  g.b[arch.sigma_index()].noalias() += d_sigma.colwise().sum().transpose();
  MatX<T> d_h;
  d_h.noalias() = d_feat * p.w[arch.feature_index()];
  d_h.noalias() += d_sigma * p.w[arch.sigma_index()];

  for (int l = arch.depth - 1; l >= 0; --l) {
    d_h = d_h.cwiseProduct((tape.h[l].array() > T(0)).template cast<T>().matrix());
    g.w[l].noalias() += d_h.transpose() * tape.x[l];
    g.b[l].noalias() += d_h.colwise().sum().transpose();
    if (l == 0) {
      if (want_input_grad) out->main_in.noalias() += d_h * p.w[0];
      break;
    }
    MatX<T> d_x;
    d_x.noalias() = d_h * p.w[l];
    if (arch.has_skip(l)) {
      if (want_input_grad) out->main_in += d_x.rightCols(arch.main_input_dim);
      d_h = d_x.leftCols(arch.hidden_width);
    } else {
      d_h = std::move(d_x);
    }
  }
}

}  // namespace mimonerf
