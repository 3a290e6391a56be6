// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint: magic + version, architecture descriptor, an offset
// table over the little-endian float32 payload (layer-major), the optimizer
// state, the iteration counter and a config snapshot. Writes are atomic
// (temp file + rename).

#pragma once

#include <string>

#include "mimonerf/adam.hpp"
#include "mimonerf/field.hpp"

namespace mimonerf {

struct Checkpoint {
  FieldConfig field;
  NetParams<float> coarse;
  NetParams<float> fine;
  AdamState adam_coarse;
  AdamState adam_fine;
  int64_t iteration = 0;
  std::string config_text;
};

inline constexpr char kCheckpointMagic[8] = {'M', 'N', 'R', 'F', 'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mimonerf
