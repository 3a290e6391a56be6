// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mimonerf/compositing.hpp"
#include "mimonerf/dataset.hpp"
#include "mimonerf/field.hpp"
#include "mimonerf/pipeline.hpp"

namespace mimonerf {

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // row-major, [0,1]
  Image8 quantize() const;
};

// Full-image inference render (base formulation, deterministic). view_tag
// seeds the per-pixel sample streams so repeated renders are byte-identical.
RenderedImage render_view(const FieldConfig& cfg, const NetParams<float>& coarse,
                          const NetParams<float>& fine, const Intrinsics& intr, const Pose& pose,
                          double t_near, double t_far, const RenderOptions& opt, int threads,
                          uint64_t view_tag = 0, RunCounter* counter = nullptr,
                          CompositeMonitor* monitor = nullptr);

}  // namespace mimonerf
