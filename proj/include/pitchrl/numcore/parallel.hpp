#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace pitchrl {

// Chunked parallel loop. Work item i goes to chunk i * threads / n, so the
// partition depends only on (n, threads); combined with per-item rng streams
// this keeps batched updates bit-deterministic for a fixed thread count.
inline void parallel_for(int n, int threads,
                         const std::function<void(int thread_idx, int begin, int end)>& fn) {
  if (n <= 0) return;
  if (threads <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    if (begin == end) continue;
    pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pitchrl
