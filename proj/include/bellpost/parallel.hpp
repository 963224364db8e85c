#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bellpost {

// Worker count: BELLPOST_THREADS when set to a positive integer, otherwise the
// hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("BELLPOST_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Runs body(i) for i in [0, n). Work items must write to disjoint outputs; the
// result is then independent of scheduling. The first exception is rethrown.
// Nested calls from inside a worker run sequentially.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = detail::in_parallel_region
                               ? 1u
                               : static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      detail::in_parallel_region = true;
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bellpost
