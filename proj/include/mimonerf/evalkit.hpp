// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mimonerf/checkpoint.hpp"
#include "mimonerf/metrics.hpp"
#include "mimonerf/trainer.hpp"

namespace mimonerf {

struct EvalRow {
  int view = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int64_t runs_per_pixel = 0;      // formula (n_c + n_c + n_f) / n_p
  uint64_t measured_runs = 0;      // live invocation counter over the split
  double flops_per_pixel = 0.0;
  double seconds_per_image = 0.0;
  int n_p = 1;
};

// Renders every view of the chosen split and scores it against the stored
// ground truth. The formula run count is cross-checked against the live
// counter and a mismatch is an error.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& dataset, bool test_split,
                               int threads);

std::string eval_report_csv(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);

struct BenchRow {
  int n_p = 0;
  double psnr = 0.0;
  int64_t runs_per_pixel = 0;
  double flops_per_pixel = 0.0;
  double seconds_per_image = 0.0;  // median of `reps` full test-split renders
};

BenchRow bench_checkpoint(const Checkpoint& ckpt, const Dataset& dataset, int threads,
                          int reps = 3);

std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace mimonerf
