// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mimonerf/common.hpp"
#include "mimonerf/dataset.hpp"
#include "mimonerf/mlp.hpp"

namespace mimonerf {

// PSNR = -10 log10(MSE) on [0,1] images; +inf for an exact match.
double psnr_from_mse(double mse);
double psnr(const Image8& a, const Image8& b);
double psnr(const std::vector<float>& a, const Image8& b);

// Rec. 601 luma of an 8-bit RGB image, in [0,1].
MatX<double> luma(const Image8& img);

// Windowed SSIM on luma: 11-tap Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, data range 1, weighted moments, valid windows only.
double ssim(const MatX<double>& a, const MatX<double>& b);
double ssim(const Image8& a, const Image8& b);

// MLP invocations per pixel: (n_c + n_c + n_f) / n_p.
int64_t count_run(int n_coarse, int n_fine, int n_p);

// 2 * sum(in*out) per invocation, times invocations per pixel.
double flops_estimate(const MlpArchitecture& arch, int n_p, int n_coarse, int n_fine);

}  // namespace mimonerf
