#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace hainav {

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, n) across up to num_threads workers (strided split).
// Results must be written to disjoint slots so the outcome is schedule-independent.
inline void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(n, std::max(1, num_threads));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([=, &fn] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace hainav
