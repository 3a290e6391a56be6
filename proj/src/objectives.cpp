// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/objectives.hpp"

#include <sstream>

namespace mimonerf {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

ReformEntry resampled(int repeat) {
  ReformEntry e;
  e.repeat = repeat;
  e.resample_shift = true;
  return e;
}

}  // namespace

ReformulationConfig base_formulation(double lambda) {
  ReformulationConfig cfg;
  ReformEntry e;
  e.repeat = 1;
  e.resample_shift = false;
  e.fixed_shift = 0;
  cfg.entries = {e};
  cfg.lambda = lambda;
  return cfg;
}

ReformulationConfig make_preset(const std::string& name, int n_p, double lambda) {
  ReformulationConfig cfg;
  cfg.lambda = lambda;
  if (name == "R1") {
    if (!is_power_of_two(n_p) || n_p < 2)
      throw UsageError("preset R1 needs n_p = 2^L with L >= 1");
    if (n_p == 2) {
      cfg.entries = {resampled(1), resampled(1)};
    } else {
      for (int r = 1; r < n_p; r *= 2) cfg.entries.push_back(resampled(r));
    }
  } else if (name == "R2") {
    if (n_p < 2) throw UsageError("preset R2 needs n_p >= 2");
    cfg.entries = {resampled(1), resampled(1)};
  } else if (name == "R3") {
    if (n_p < 2) throw UsageError("preset R3 needs n_p >= 2");
    for (int m = 0; m < n_p - 1; ++m) cfg.entries.push_back(resampled(1));
  } else if (name == "R4") {
    if (n_p < 4 || n_p % 2 != 0) throw UsageError("preset R4 needs even n_p >= 4");
    cfg.entries = {resampled(1), resampled(2)};
  } else if (name == "R5") {
    if (n_p < 2 || n_p % 2 != 0) throw UsageError("preset R5 needs even n_p >= 2");
    cfg.entries = {resampled(1), resampled(n_p / 2)};
  } else if (name == "R6") {
    if (n_p < 3) throw UsageError("preset R6 needs n_p >= 3");
    cfg.entries = {resampled(1), resampled(1), resampled(1)};
  } else {
    throw UsageError("unknown preset '" + name + "' (expected R1..R6 or an explicit R list)");
  }
  validate_reformulations(cfg, n_p);
  return cfg;
}

ReformulationConfig parse_reformulations(const std::string& text, int n_p, double lambda) {
  ReformulationConfig cfg;
  cfg.lambda = lambda;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw UsageError("reformulations: empty entry in '" + text + "'");
    ReformEntry e;
    const size_t at = item.find('@');
    try {
      if (at == std::string::npos) {
        e.repeat = std::stoi(item);
        e.resample_shift = true;
      } else {
        e.repeat = std::stoi(item.substr(0, at));
        e.fixed_shift = std::stoi(item.substr(at + 1));
        e.resample_shift = false;
      }
    } catch (const std::exception&) {
      throw UsageError("reformulations: cannot parse entry '" + item + "'");
    }
    cfg.entries.push_back(e);
  }
  if (cfg.entries.empty()) throw UsageError("reformulations: empty list");
  validate_reformulations(cfg, n_p);
  return cfg;
}

void validate_reformulations(const ReformulationConfig& cfg, int n_p) {
  if (cfg.entries.empty()) throw UsageError("reformulations: need at least one entry");
  if (cfg.lambda < 0.0) throw UsageError("reformulations: lambda must be >= 0");
  // Distinct-shift feasibility per window size.
  std::vector<std::pair<int, int>> fixed;  // (window, shift)
  std::vector<int> window_count;
  for (const auto& e : cfg.entries) {
    if (e.repeat < 1 || n_p % e.repeat != 0)
      throw UsageError("reformulations: repetition must divide n_p");
    const int w = e.window(n_p);
    if (!e.resample_shift) {
      if (e.fixed_shift < 0 || e.fixed_shift >= w)
        throw UsageError("reformulations: fixed shift out of range for window " +
                         std::to_string(w));
      for (const auto& [fw, fs] : fixed)
        if (fw == w && fs == e.fixed_shift)
          throw UsageError("reformulations: duplicate (window, shift) pair");
      fixed.emplace_back(w, e.fixed_shift);
    }
  }
  for (const auto& e : cfg.entries) {
    const int w = e.window(n_p);
    int same = 0;
    for (const auto& o : cfg.entries)
      if (o.window(n_p) == w) ++same;
    if (same > w)
      throw UsageError("reformulations: more entries than distinct shifts for window " +
                       std::to_string(w));
  }
}

}  // namespace mimonerf
