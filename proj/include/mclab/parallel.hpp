#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mclab {

namespace detail {
inline std::atomic<int>& parallelism_slot() {
  static std::atomic<int> value{0};
  return value;
}

inline bool& inside_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Number of worker threads used by the evaluators (0 = hardware concurrency).
inline void set_parallelism(int threads) { detail::parallelism_slot() = std::max(0, threads); }

inline int parallelism() {
  const int configured = detail::parallelism_slot();
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls `fn(i)` for every i in [0, count). Work is handed out in chunks;
/// callers write results into per-index slots, so the outcome does not depend
/// on scheduling. Nested calls from a worker run serially.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t chunk = 16) {
  const int threads = std::min<std::size_t>(parallelism(), (count + chunk - 1) / std::max<std::size_t>(chunk, 1));
  if (threads <= 1 || detail::inside_worker()) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    detail::inside_worker() = true;
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = count;
    }
    detail::inside_worker() = false;
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mclab
