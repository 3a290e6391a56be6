// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>

#include "mimonerf/camera.hpp"

namespace mimonerf {

// Ordered samples along one ray. delta[i] = t[i+1] - t[i] for i < n-1 and
// t_far - t[n-1] for the last sample (bounded scenes, no sentinel segment).
template <class T>
struct SampleSet {
  VecX<T> t;       // strictly increasing, within [t_near, t_far]
  VecX<T> delta;   // segment lengths, >= 0
  MatX<T> coords;  // n x 3, origin + t * dir
};

template <class T>
void fill_coords_and_deltas(const Ray& ray, SampleSet<T>& s) {
  const Eigen::Index n = s.t.size();
  s.delta.resize(n);
  s.coords.resize(n, 3);
  const Vec3<T> o = ray.origin.cast<T>();
  const Vec3<T> d = ray.dir.cast<T>();
  for (Eigen::Index i = 0; i < n; ++i) {
    s.coords.row(i) = (o + s.t[i] * d).transpose();
    s.delta[i] = (i + 1 < n ? s.t[i + 1] : static_cast<T>(ray.t_far)) - s.t[i];
    if (s.delta[i] < T(0)) s.delta[i] = T(0);
  }
}

// One sample per equal-width bin of [t_near, t_far]; bin midpoints when
// jitter is off, uniform within each bin when on.
template <class T>
SampleSet<T> stratified_sample(const Ray& ray, int n_samples, bool jitter, Rng& rng) {
  if (n_samples < 1) throw UsageError("stratified_sample: n_samples must be >= 1");
  SampleSet<T> s;
  s.t.resize(n_samples);
  const double bin = (ray.t_far - ray.t_near) / n_samples;
  for (int i = 0; i < n_samples; ++i) {
    const double u = jitter ? rng.uniform() : 0.5;
    s.t[i] = static_cast<T>(ray.t_near + (i + u) * bin);
  }
  fill_coords_and_deltas(ray, s);
  return s;
}

// Inverse-transform samples from the piecewise-constant PDF proportional to
// the coarse compositing weights over the n_c stratified bins, merged with
// the coarse t values. All-zero weights fall back to a uniform PDF. Sample
// locations are data: nothing differentiates through them.
template <class T>
SampleSet<T> hierarchical_sample(const Ray& ray, const VecX<T>& coarse_t,
                                 const VecX<T>& coarse_weights, int n_fine, Rng& rng) {
  const int n_c = static_cast<int>(coarse_weights.size());
  if (n_c < 1 || coarse_t.size() != n_c) throw UsageError("hierarchical_sample: bad coarse input");
  if (n_fine < 0) throw UsageError("hierarchical_sample: n_fine must be >= 0");
  std::vector<double> mass(n_c);
  double total = 0.0;
  for (int i = 0; i < n_c; ++i) {
    const double w = std::max(0.0, static_cast<double>(coarse_weights[i]));
    mass[i] = w;
    total += w;
  }
  if (total <= 1e-12) {
    std::fill(mass.begin(), mass.end(), 1.0);
    total = n_c;
  }
  std::vector<double> cdf(n_c + 1, 0.0);
  for (int i = 0; i < n_c; ++i) cdf[i + 1] = cdf[i] + mass[i] / total;
  cdf[n_c] = 1.0;

  const double bin = (ray.t_far - ray.t_near) / n_c;
  std::vector<double> merged(coarse_t.data(), coarse_t.data() + n_c);
  merged.reserve(n_c + n_fine);
  for (int k = 0; k < n_fine; ++k) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int idx = static_cast<int>(std::distance(cdf.begin(), it)) - 1;
    idx = std::clamp(idx, 0, n_c - 1);
    const double span = cdf[idx + 1] - cdf[idx];
    const double frac = span > 0.0 ? (u - cdf[idx]) / span : 0.5;
    merged.push_back(ray.t_near + (idx + frac) * bin);
  }
  std::sort(merged.begin(), merged.end());
  SampleSet<T> s;
  s.t.resize(static_cast<Eigen::Index>(merged.size()));
  for (size_t i = 0; i < merged.size(); ++i) {
    T v = static_cast<T>(merged[i]);
    if (i > 0 && v <= s.t[static_cast<Eigen::Index>(i) - 1])
      v = std::nextafter(s.t[static_cast<Eigen::Index>(i) - 1], std::numeric_limits<T>::max());
    s.t[static_cast<Eigen::Index>(i)] = v;
  }
  fill_coords_and_deltas(ray, s);
  return s;
}

}  // namespace mimonerf
