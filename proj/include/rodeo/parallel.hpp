#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rodeo {

// Worker count for independent tasks. Results never depend on it.
struct Parallelism {
  unsigned threads = 0;  // 0 = hardware concurrency

  unsigned resolved() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

// Evaluates fn(i) for i in [0, n) on a small pool and returns the results in
// index order. fn must not touch shared mutable state.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, const Parallelism& par, Fn&& fn) {
  std::vector<T> out(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(par.resolved(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace rodeo
