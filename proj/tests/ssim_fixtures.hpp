// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Ten luma image pairs with SSIM values frozen from an independent reference
// implementation (scikit-image 0.25.2 structural_similarity with
// gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
// data_range=1, K1=0.01, K2=0.03). The pixel data is regenerated here with
// the same LCG recipe the reference values were computed on.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "testutil.hpp"

namespace mimonerf::test {

struct SsimFixture {
  std::string name;
  MatX<double> a;  // luma
  MatX<double> b;
  double expected;
};

namespace ssim_detail {

constexpr int kSize = 64;

struct Rgb {
  std::vector<Vec3d> px;
  Rgb() : px(kSize * kSize, Vec3d::Zero()) {}
  Vec3d& at(int x, int y) { return px[static_cast<size_t>(y * kSize + x)]; }
  const Vec3d& at(int x, int y) const { return px[static_cast<size_t>(y * kSize + x)]; }
  MatX<double> luma() const {
    MatX<double> out(kSize, kSize);
    for (int y = 0; y < kSize; ++y)
      for (int x = 0; x < kSize; ++x) {
        const Vec3d& p = at(x, y);
        out(y, x) = 0.299 * p.x() + 0.587 * p.y() + 0.114 * p.z();
      }
    return out;
  }
};

inline Rgb noise(FixtureLcg& lcg) {
  Rgb img;
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y)[c] = lcg.next_unit();
  return img;
}

inline Rgb constant(double v) {
  Rgb img;
  for (auto& p : img.px) p = Vec3d(v, v, v);
  return img;
}

inline Rgb ramp() {
  Rgb img;
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double v = 0.5 * (x / (kSize - 1.0) + y / (kSize - 1.0));
      img.at(x, y) = Vec3d(v, v, v);
    }
  return img;
}

inline Rgb sinusoid(double phase) {
  Rgb img;
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double v = 0.5 + 0.5 * std::sin(0.37 * x + 0.23 * y + phase);
      img.at(x, y) = Vec3d(v, 0.5 + 0.5 * std::sin(0.29 * x - 0.31 * y + phase), 1.0 - v);
    }
  return img;
}

inline Rgb invert(const Rgb& a) {
  Rgb out;
  for (size_t i = 0; i < a.px.size(); ++i) out.px[i] = Vec3d::Ones() - a.px[i];
  return out;
}

inline Rgb shift_wrap(const Rgb& a) {
  Rgb out;
  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) out.at(x, y) = a.at((x + kSize - 1) % kSize, y);
  return out;
}

inline Rgb clamp01(Rgb img) {
  for (auto& p : img.px)
    for (int c = 0; c < 3; ++c) p[c] = std::clamp(p[c], 0.0, 1.0);
  return img;
}

}  // namespace ssim_detail

inline std::vector<SsimFixture> ssim_fixtures() {
  using namespace ssim_detail;
  FixtureLcg lcg(12345);
  std::vector<SsimFixture> out;
  auto add = [&](const std::string& name, const Rgb& a, const Rgb& b, double expected) {
    out.push_back({name, a.luma(), b.luma(), expected});
  };
  {
    const Rgb r = ramp();
    add("ramp_vs_negative", r, invert(r), 0.184482762681319);
  }
  {
    const Rgb a = noise(lcg);
    const Rgb b = noise(lcg);
    add("noise_vs_noise", a, b, 0.009724362261560);
  }
  {
    Rgb a = noise(lcg);
    Rgb b = a;
    for (auto& p : b.px) p = (p * 0.9).array() + 0.05;
    add("noise_vs_scaled", a, clamp01(b), 0.994525831616269);
  }
  {
    Rgb a = noise(lcg);
    Rgb b = a;
    for (auto& p : b.px) p.y() = std::clamp(p.y() * 0.5, 0.0, 1.0);
    add("noise_vs_greenhalf", a, b, 0.815317106610417);
  }
  add("sin_vs_sin_phase", sinusoid(0.0), sinusoid(0.8), 0.596886516079598);
  add("const_vs_const", constant(0.3), constant(0.7), 0.724185485261251);
  {
    const Rgb s = sinusoid(1.7);
    add("sin_vs_shift", s, shift_wrap(s), 0.931048420181186);
  }
  {
    const Rgb a = noise(lcg);
    add("noise_vs_negative", a, invert(a), -0.962631974536455);
  }
  add("ramp_vs_noise", ramp(), noise(lcg), 0.024628550162906);
  {
    Rgb a = sinusoid(2.9);
    Rgb b = a;
    for (auto& p : b.px) p = p.array() + 0.15;
    add("sin_vs_lifted", a, clamp01(b), 0.929502827222760);
  }
  return out;
}

}  // namespace mimonerf::test
