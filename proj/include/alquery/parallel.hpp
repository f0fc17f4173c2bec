#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace alquery {

// Scoring parallelism cap; ALQUERY_THREADS=1 forces serial execution.
inline unsigned max_threads() {
  static const unsigned cached = [] {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ALQUERY_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
  }();
  return cached;
}

// Runs body(begin, end) over disjoint chunks of [0, n). Bodies must write
// only to per-index slots so results do not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned threads = std::min<unsigned>(max_threads(), n > 0 ? static_cast<unsigned>(n) : 1);
  if (threads <= 1 || n < 256) {
    body(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(body, begin, end);
  }
  for (auto& w : workers) w.join();
}

}  // namespace alquery
