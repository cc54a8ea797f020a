// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace coba3d {

// Worker count: explicit request wins, then COBA3D_WORKERS, then hardware
// concurrency. Always at least 1.
inline int resolve_workers(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COBA3D_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Splits [0, count) into contiguous chunks, one per worker, and runs fn(begin,
// end) on each. Partitioning depends only on count and the worker count, so
// per-chunk work is deterministic; callers must make cross-chunk reductions
// order-independent (e.g. write into disjoint slots).
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  workers = resolve_workers(workers);
  if (count == 0) return;
  const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (n_chunks <= 1) {
    fn(0, count);
    return;
  }
  const std::size_t base = count / n_chunks;
  const std::size_t rem = count % n_chunks;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n_chunks);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < n_chunks; ++i) {
    const std::size_t len = base + (i < rem ? 1 : 0);
    const std::size_t end = begin + len;
    threads.emplace_back([&fn, &errors, i, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace coba3d
