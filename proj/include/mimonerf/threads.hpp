// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mimonerf {

inline int default_thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Splits [0, count) into one contiguous shard per worker and runs
// fn(shard_index, begin, end) on each. Shard 0 runs on the calling thread;
// with n_threads == 1 no thread is spawned at all. Shard boundaries depend
// only on (count, n_threads), so a fixed thread count gives a fixed
// decomposition. Exceptions are rethrown on the calling thread.
template <class Fn>
void parallel_shards(int count, int n_threads, Fn&& fn) {
  if (n_threads < 1) n_threads = 1;
  if (n_threads > count) n_threads = count > 0 ? count : 1;
  if (n_threads == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  const int base = count / n_threads;
  const int extra = count % n_threads;
  auto shard_begin = [&](int s) { return s * base + std::min(s, extra); };
  for (int s = 1; s < n_threads; ++s) {
    pool.emplace_back([&, s]() {
      try {
        fn(s, shard_begin(s), shard_begin(s + 1));
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  try {
    fn(0, shard_begin(0), shard_begin(1));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mimonerf
