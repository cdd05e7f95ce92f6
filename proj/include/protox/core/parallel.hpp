#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace protox {

inline int resolve_workers(int requested) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int cap = hw > 0 ? hw : 1;
  if (requested <= 0) return cap;
  return std::min(requested, cap);
}

// Runs fn(begin, end, worker_index) over contiguous chunks of [0, n).
// Callers that reduce results must do so in worker-index order so the
// outcome does not depend on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (n == 0) return;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (w <= 1) {
    fn(std::size_t{0}, n, 0);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t begin = i * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end, i] { fn(begin, end, static_cast<int>(i)); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace protox
