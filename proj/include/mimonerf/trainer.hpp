// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Training loops for the three variants:
//   naive   - single base MIMO formulation, pixel loss only
//   self    - M reformulated evaluations (group shift + variation reduction)
//             tied together by the 3D consistency loss
//   distill - base formulation regularized towards a frozen n_p = 1 teacher
// One iteration: parallel forward/backward over ray shards, gradient
// reduction in shard order, single-threaded Adam step.

#pragma once

#include <ostream>

#include "mimonerf/checkpoint.hpp"
#include "mimonerf/config.hpp"
#include "mimonerf/dataset.hpp"
#include "mimonerf/render.hpp"

namespace mimonerf {

struct MetricsRow {
  int64_t iteration = 0;
  double loss = 0.0;        // windowed mean of the full objective
  double loss_pixel = 0.0;  // windowed mean, pixel term
  double loss_3d = 0.0;     // windowed mean, consistency term (pre-lambda)
  double psnr = 0.0;        // held-out view PSNR at this iteration
  uint64_t runs = 0;        // cumulative field MLP invocations (training)
  double seconds = 0.0;     // wall-clock since training start
};

struct TrainStats {
  uint64_t field_runs = 0;
  uint64_t teacher_runs = 0;
  uint64_t composited_rays = 0;
  uint64_t invariant_violations = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
  TrainStats stats;
};

// Loads cfg.scene as a dataset directory if it holds a manifest, otherwise
// generates the procedural dataset described by the config.
Dataset resolve_dataset(const TrainConfig& cfg, int threads);

// Runs the configured training. When out_dir is non-empty, writes
// out_dir/model.ckpt and out_dir/metrics.csv (also on divergence, with the
// last good parameters, before the NumericError propagates).
TrainResult train(const TrainConfig& cfg, const Dataset& dataset, int threads,
                  const std::string& out_dir = "", std::ostream* progress = nullptr);

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

// Expected MLP invocations for one training iteration (run-budget identity,
// including the +1 padded group per shifted reformulation per pass).
int64_t expected_iteration_runs(const TrainConfig& cfg, const std::vector<int>& shifts);

// The per-iteration shift draw: distinct shifts per window size, resampled
// from the stream (seed, shift-stream, iteration).
std::vector<int> draw_shifts(const ReformulationConfig& reforms, int n_p, GroupingMode mode,
                             uint64_t seed, int64_t iteration);

ReformulationConfig reformulations_for(const TrainConfig& cfg);

RenderOptions render_options_for(const TrainConfig& cfg, const Dataset& dataset);

}  // namespace mimonerf
