// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numeric>
#include <vector>

#include "mimonerf/common.hpp"

namespace mimonerf {

enum class GroupingMode { kNeighbor, kRandom };

// Partition of ray-sample indices into fixed-width windows. A shifted layout
// starts the first window `shift` samples before the front sample; slots that
// fall outside [0, n_samples) are padded and replicate the nearest real
// sample's coordinate. The padding mask keeps them out of rendering and
// losses.
struct GroupLayout {
  int n_samples = 0;
  int width = 0;  // samples per MLP window (n_p / repeat)
  int shift = 0;  // in [0, width)
  int n_groups = 0;
  GroupingMode mode = GroupingMode::kNeighbor;
  std::vector<int32_t> sample_index;  // n_groups * width, clamped to real samples
  std::vector<uint8_t> padded;        // 1 for padded slots

  int slot(int group, int j) const { return sample_index[group * width + j]; }
  bool is_padded(int group, int j) const { return padded[group * width + j] != 0; }
  int padded_slot_count() const {
    return static_cast<int>(std::accumulate(padded.begin(), padded.end(), 0));
  }
};

inline GroupLayout make_groups(int n_samples, int width, int shift, GroupingMode mode,
                               Rng* rng = nullptr) {
  if (width < 1) throw UsageError("make_groups: group width must be >= 1");
  if (shift < 0 || shift >= width) throw UsageError("make_groups: shift must be in [0, width)");
  GroupLayout layout;
  layout.n_samples = n_samples;
  layout.width = width;
  layout.mode = mode;
  if (mode == GroupingMode::kRandom) {
    if (n_samples % width != 0)
      throw UsageError("make_groups: random grouping needs width | n_samples; pad the sample "
                       "count to a multiple of the group size");
    if (!rng) throw UsageError("make_groups: random grouping needs an rng");
    layout.shift = 0;
    layout.n_groups = n_samples / width;
    layout.sample_index.resize(n_samples);
    std::iota(layout.sample_index.begin(), layout.sample_index.end(), 0);
    std::vector<int32_t>& perm = layout.sample_index;
    rng->shuffle(perm);
    layout.padded.assign(n_samples, 0);
    return layout;
  }
  if (shift == 0 && n_samples % width != 0)
    throw UsageError("make_groups: n_samples must be a multiple of the group size; pad the "
                     "sample count instead of truncating");
  layout.shift = shift;
  layout.n_groups = ceil_div(n_samples + shift, width);
  layout.sample_index.resize(layout.n_groups * width);
  layout.padded.resize(layout.n_groups * width);
  for (int g = 0; g < layout.n_groups; ++g) {
    for (int j = 0; j < width; ++j) {
      const int raw = g * width - shift + j;
      const bool pad = raw < 0 || raw >= n_samples;
      layout.padded[g * width + j] = pad ? 1 : 0;
      layout.sample_index[g * width + j] =
          static_cast<int32_t>(std::clamp(raw, 0, n_samples - 1));
    }
  }
  return layout;
}

// Slot -> sample map when each window coordinate is repeated `repeat` times
// to fill the n_p = width * repeat MLP inputs. Slot q holds the coordinate of
// window position q / repeat.
inline int repeated_slot_sample(const GroupLayout& layout, int group, int slot_q, int repeat) {
  return layout.slot(group, slot_q / repeat);
}
inline bool repeated_slot_padded(const GroupLayout& layout, int group, int slot_q, int repeat) {
  return layout.is_padded(group, slot_q / repeat);
}

}  // namespace mimonerf
