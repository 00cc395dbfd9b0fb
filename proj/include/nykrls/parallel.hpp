#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nykrls {

// Runs fn(i) for i in [0, count) on up to `threads` workers, each taking a
// contiguous block. Work assignment is independent of the thread count, so
// any per-index output slot receives the same value regardless of threading.
// The first exception thrown by a worker is rethrown on the calling thread.
inline void parallel_for(std::ptrdiff_t count, int threads,
                         const std::function<void(std::ptrdiff_t)>& fn) {
  if (count <= 0) return;
  const int workers =
      static_cast<int>(std::min<std::ptrdiff_t>(threads < 1 ? 1 : threads, count));
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t begin = count * w / workers;
    const std::ptrdiff_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nykrls
