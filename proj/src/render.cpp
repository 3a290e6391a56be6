// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/render.hpp"

#include "mimonerf/threads.hpp"

namespace mimonerf {

Image8 RenderedImage::quantize() const {
  Image8 img;
  img.width = width;
  img.height = height;
  img.rgb.resize(rgb.size());
  for (size_t i = 0; i < rgb.size(); ++i)
    img.rgb[i] = static_cast<uint8_t>(
        std::lround(std::clamp(rgb[i], 0.0f, 1.0f) * 255.0f));
  return img;
}

RenderedImage render_view(const FieldConfig& cfg, const NetParams<float>& coarse,
                          const NetParams<float>& fine, const Intrinsics& intr, const Pose& pose,
                          double t_near, double t_far, const RenderOptions& opt, int threads,
                          uint64_t view_tag, RunCounter* counter, CompositeMonitor* monitor) {
  RenderedImage out;
  out.width = intr.width;
  out.height = intr.height;
  out.rgb.resize(static_cast<size_t>(intr.width) * intr.height * 3);

  std::vector<RunCounter> counters(static_cast<size_t>(std::max(1, threads)));
  parallel_shards(intr.height, threads, [&](int shard, int y0, int y1) {
    constexpr int kRowsPerBatch = 4;
    for (int y = y0; y < y1; y += kRowsPerBatch) {
      const int rows = std::min(kRowsPerBatch, y1 - y);
      std::vector<Ray> rays;
      rays.reserve(static_cast<size_t>(rows) * intr.width);
      for (int dy = 0; dy < rows; ++dy)
        for (int x = 0; x < intr.width; ++x)
          rays.push_back(generate_ray(intr, pose, x, y + dy, t_near, t_far));
      std::vector<Vec3f> pixels(rays.size());
      // Stream tag folds the view and the first row so every pixel's sample
      // stream is independent of threading and batch shape.
      render_batch<float>(cfg, coarse, fine, rays, opt,
                          hash_tags(view_tag, static_cast<uint64_t>(y)), nullptr, &pixels,
                          &counters[static_cast<size_t>(shard)], monitor);
      for (size_t i = 0; i < rays.size(); ++i) {
        const size_t px = (static_cast<size_t>(y) * intr.width) * 3 + i * 3;
        out.rgb[px + 0] = pixels[i].x();
        out.rgb[px + 1] = pixels[i].y();
        out.rgb[px + 2] = pixels[i].z();
      }
    }
  });
  if (counter)
    for (const RunCounter& c : counters) counter->add(c.count);
  return out;
}

}  // namespace mimonerf
