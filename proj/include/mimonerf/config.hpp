// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text key=value run configuration. Unknown keys are rejected; every
// key has a default, so an empty file is a valid config.

#pragma once

#include <map>
#include <string>

#include "mimonerf/common.hpp"

namespace mimonerf {

struct TrainConfig {
  std::string scene = "spheres3";  // scene name, or a dataset directory
  int views = 20;
  int resolution = 64;
  int n_coarse = 32;
  int n_fine = 32;
  int n_p = 1;
  std::string preset = "R1";  // R1..R6 or explicit list like "1,2" / "1@0,1@2"
  double lambda = 1.0;
  double lr = 5e-4;
  int64_t iters = 20000;
  int batch_rays = 256;
  uint64_t seed = 1;
  bool jitter = true;
  std::string grouping = "neighbor";  // neighbor | random
  std::string variant = "naive";      // naive | self | distill
  std::string teacher;                // teacher checkpoint (distill only)
  std::string out_dir = "out";
  std::string background = "white";   // white | black | gray | "r,g,b"
  std::string camera_mode = "orbit";  // orbit | forward
  int width = 64;
  int depth = 4;
  int pos_freqs = 6;
  int dir_freqs = 4;
};

TrainConfig default_config();
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config(const std::string& path);
void set_config_key(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string config_to_text(const TrainConfig& cfg);
void validate_config(const TrainConfig& cfg);

Vec3d parse_background(const std::string& value);
bool parse_bool(const std::string& value);

}  // namespace mimonerf
