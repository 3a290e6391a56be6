// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Posed-image datasets rendered by the scene oracle. On disk: a plain-text
// manifest.txt (intrinsics, near/far, per-image pose rows with split tags)
// plus one binary PPM (P6, maxval 255) per view.

#pragma once

#include <string>
#include <vector>

#include "mimonerf/camera.hpp"
#include "mimonerf/scene.hpp"

namespace mimonerf {

struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (y * width + x); }
  const uint8_t* pixel(int x, int y) const { return rgb.data() + 3 * (y * width + x); }
};

struct DatasetView {
  std::string filename;
  Pose pose;
  bool is_test = false;
  Image8 image;
};

struct Dataset {
  std::string scene_name;
  std::string camera_mode;  // "orbit" or "forward"
  Intrinsics intrinsics;
  double t_near = 0.0;
  double t_far = 1.0;
  Vec3d background = Vec3d::Ones();
  std::vector<DatasetView> views;

  std::vector<int> split_indices(bool test) const {
    std::vector<int> out;
    for (size_t i = 0; i < views.size(); ++i)
      if (views[i].is_test == test) out.push_back(static_cast<int>(i));
    return out;
  }
};

void write_ppm(const std::string& path, const Image8& img);
Image8 read_ppm(const std::string& path);
void write_png(const std::string& path, const Image8& img);

// Cameras on a sphere looking at the origin ("orbit") or inside a narrow
// forward-facing cone ("forward"). Every 5th view is tagged test. Images are
// rendered with the quadrature oracle; the whole dataset is a pure function
// of (scene, n_views, resolution, seed, camera_mode).
Dataset generate_dataset(const ProceduralScene& scene, int n_views, int resolution, uint64_t seed,
                         const std::string& camera_mode, int n_quad = 4096, int threads = 1);

void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

Ray dataset_ray(const Dataset& dataset, int view_index, int px, int py);

}  // namespace mimonerf
