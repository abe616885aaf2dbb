#pragma once

// Minimal data-parallel loop. SADDLEKIT_THREADS caps the worker count; results
// are always written to preallocated slots indexed by iteration, so parallel
// and serial runs produce identical output.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace saddlekit {

inline int thread_cap() {
  if (const char* env = std::getenv("SADDLEKIT_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class F>
void parallel_for(int n, F&& body) {
  int workers = std::min(thread_cap(), n);
  if (workers <= 1 || n < 64) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace saddlekit
