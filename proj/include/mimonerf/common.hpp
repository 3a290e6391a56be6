// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimonerf {

template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Vec3 = Eigen::Matrix<T, 3, 1>;

using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;

// Error categories aligned with the CLI exit-code contract.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic counter-free PRNG. Sub-streams are derived by hashing tag
// words into the seed, so every subsystem draws from an independent stream
// rooted at the single run seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x6d696d6f6e657266ULL)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  float uniform_f() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  uint64_t state_;
};

inline uint64_t hash_tags(uint64_t seed) { return splitmix64(seed); }

template <class... Rest>
uint64_t hash_tags(uint64_t seed, uint64_t tag, Rest... rest) {
  return hash_tags(splitmix64(seed ^ (tag + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Stream factory: make_rng(seed, kStreamX, iteration, ray_index, ...)
template <class... Tags>
Rng make_rng(uint64_t seed, Tags... tags) {
  return Rng(hash_tags(seed, static_cast<uint64_t>(tags)...));
}

// Fixed stream ids for everything that consumes randomness.
enum StreamId : uint64_t {
  kStreamInit = 1,        // parameter initialization (per network)
  kStreamRayDraw = 2,     // training ray selection
  kStreamJitter = 3,      // stratified jitter
  kStreamHierarchical = 4,// fine-sample inverse-CDF draws
  kStreamShift = 5,       // per-iteration group shifts
  kStreamCamera = 6,      // dataset camera placement
  kStreamPermute = 7,     // random grouping permutations
};

template <class T>
bool all_finite(const MatX<T>& m) {
  return m.allFinite();
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace mimonerf
