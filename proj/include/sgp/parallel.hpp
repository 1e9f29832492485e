#pragma once

// Minimal fork-join helper. Work items are independent and written to
// caller-owned slots by index, so results are deterministic regardless of
// the worker count.

#include <cstddef>
#include <thread>
#include <vector>

namespace sgp {

inline unsigned effective_jobs(int jobs) {
  if (jobs > 0) return static_cast<unsigned>(jobs);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads (0 = all hardware).
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(effective_jobs(jobs), n == 0 ? 1 : n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace sgp
