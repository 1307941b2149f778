#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace geolab {

/// GEOLAB_THREADS when set and positive, else the hardware concurrency.
int worker_threads();

/// Calls fn(i) for i in [0, n) on up to `threads` threads. Callers write
/// results into per-index slots, so the merge order never depends on timing.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

}  // namespace geolab
