// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mimonerf/common.hpp"

namespace mimonerf {

// Frequency encoding [p, sin(f0 p), cos(f0 p), ..., sin(f_{L-1} p), cos(f_{L-1} p)]
// with f_k = 2^k (optionally scaled by pi).
struct EncodingSpec {
  int num_frequencies = 0;
  bool include_input = true;
  bool use_pi = false;
  int input_dim = 3;

  int output_dim() const {
    return input_dim * ((include_input ? 1 : 0) + 2 * num_frequencies);
  }
  double frequency(int k) const {
    const double f = std::ldexp(1.0, k);
    return use_pi ? f * M_PI : f;
  }
};

template <class T>
void positional_encode(const EncodingSpec& spec, const T* p, T* out) {
  int o = 0;
  if (spec.include_input) {
    for (int d = 0; d < spec.input_dim; ++d) out[o++] = p[d];
  }
  for (int k = 0; k < spec.num_frequencies; ++k) {
    const T f = static_cast<T>(spec.frequency(k));
    for (int d = 0; d < spec.input_dim; ++d) out[o++] = std::sin(f * p[d]);
    for (int d = 0; d < spec.input_dim; ++d) out[o++] = std::cos(f * p[d]);
  }
}

template <class T>
VecX<T> positional_encode(const EncodingSpec& spec, const VecX<T>& p) {
  if (p.size() != spec.input_dim) throw UsageError("positional_encode: dim mismatch");
  if (!p.allFinite()) throw NumericError("positional_encode: non-finite input");
  VecX<T> out(spec.output_dim());
  positional_encode(spec, p.data(), out.data());
  return out;
}

// Row-wise batch encoding, vectorized per frequency block.
template <class T>
MatX<T> positional_encode_batch(const EncodingSpec& spec, const MatX<T>& points) {
  if (points.cols() != spec.input_dim) throw UsageError("positional_encode: dim mismatch");
  MatX<T> out(points.rows(), spec.output_dim());
  int o = 0;
  if (spec.include_input) {
    out.leftCols(spec.input_dim) = points;
    o += spec.input_dim;
  }
  for (int k = 0; k < spec.num_frequencies; ++k) {
    const T f = static_cast<T>(spec.frequency(k));
    out.middleCols(o, spec.input_dim) = (points.array() * f).sin();
    out.middleCols(o + spec.input_dim, spec.input_dim) = (points.array() * f).cos();
    o += 2 * spec.input_dim;
  }
  return out;
}

}  // namespace mimonerf
