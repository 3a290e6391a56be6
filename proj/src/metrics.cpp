// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/metrics.hpp"

namespace mimonerf {

double psnr_from_mse(double mse) {
  if (mse < 0.0) throw UsageError("psnr: negative MSE");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double psnr(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height)
    throw UsageError("psnr: image dimensions differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = (a.rgb[i] - b.rgb[i]) / 255.0;
    acc += d * d;
  }
  return psnr_from_mse(acc / static_cast<double>(a.rgb.size()));
}

double psnr(const std::vector<float>& a, const Image8& b) {
  if (a.size() != b.rgb.size()) throw UsageError("psnr: image dimensions differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b.rgb[i] / 255.0;
    acc += d * d;
  }
  return psnr_from_mse(acc / static_cast<double>(a.size()));
}

MatX<double> luma(const Image8& img) {
  MatX<double> out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const uint8_t* p = img.pixel(x, y);
      out(y, x) = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    }
  }
  return out;
}

namespace {

constexpr int kSsimRadius = 5;  // 11-tap window
constexpr double kSsimSigma = 1.5;

VecX<double> ssim_kernel() {
  VecX<double> k(2 * kSsimRadius + 1);
  double sum = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    const double v = std::exp(-0.5 * i * i / (kSsimSigma * kSsimSigma));
    k[i + kSsimRadius] = v;
    sum += v;
  }
  k /= sum;
  return k;
}

// Separable valid-region Gaussian filter.
MatX<double> blur_valid(const MatX<double>& img, const VecX<double>& k) {
  const int r = kSsimRadius;
  MatX<double> tmp(img.rows(), img.cols() - 2 * r);
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < tmp.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < k.size(); ++i) acc += k[i] * img(y, x + i);
      tmp(y, x) = acc;
    }
  MatX<double> out(img.rows() - 2 * r, tmp.cols());
  for (Eigen::Index y = 0; y < out.rows(); ++y)
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < k.size(); ++i) acc += k[i] * tmp(y + i, x);
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

double ssim(const MatX<double>& a, const MatX<double>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError("ssim: image dimensions differ");
  if (a.rows() < 2 * kSsimRadius + 1 || a.cols() < 2 * kSsimRadius + 1)
    throw UsageError("ssim: image smaller than the filter window");
  const VecX<double> k = ssim_kernel();
  const MatX<double> mu_a = blur_valid(a, k);
  const MatX<double> mu_b = blur_valid(b, k);
  const MatX<double> aa = blur_valid(a.cwiseProduct(a), k);
  const MatX<double> bb = blur_valid(b.cwiseProduct(b), k);
  const MatX<double> ab = blur_valid(a.cwiseProduct(b), k);
  constexpr double kC1 = 0.01 * 0.01;  // (K1 * data_range)^2
  constexpr double kC2 = 0.03 * 0.03;
  double total = 0.0;
  for (Eigen::Index y = 0; y < mu_a.rows(); ++y) {
    for (Eigen::Index x = 0; x < mu_a.cols(); ++x) {
      const double ma = mu_a(y, x), mb = mu_b(y, x);
      const double va = aa(y, x) - ma * ma;
      const double vb = bb(y, x) - mb * mb;
      const double cov = ab(y, x) - ma * mb;
      total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
  }
  return total / static_cast<double>(mu_a.rows() * mu_a.cols());
}

double ssim(const Image8& a, const Image8& b) { return ssim(luma(a), luma(b)); }

int64_t count_run(int n_coarse, int n_fine, int n_p) {
  if (n_p < 1 || n_coarse % n_p != 0 || (n_coarse + n_fine) % n_p != 0)
    throw UsageError("count_run: sample counts must be multiples of n_p");
  return static_cast<int64_t>(n_coarse) / n_p +
         static_cast<int64_t>(n_coarse + n_fine) / n_p;
}

double flops_estimate(const MlpArchitecture& arch, int n_p, int n_coarse, int n_fine) {
  double per_invocation = 0.0;
  for (int t = 0; t < arch.tensor_count(); ++t)
    per_invocation +=
        2.0 * static_cast<double>(arch.tensor_in_dim(t)) * arch.tensor_out_dim(t);
  if (per_invocation == 0.0) return 0.0;
  return per_invocation * static_cast<double>(count_run(n_coarse, n_fine, n_p));
}

}  // namespace mimonerf
