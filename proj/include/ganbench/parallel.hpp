/*
 * Index-based parallel loop. Work items write only to their own index, so
 * results do not depend on the worker count; reductions happen afterwards
 * in index order on the calling thread.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "ganbench/errors.hpp"

namespace ganbench {

namespace detail {
inline int& worker_count_ref() {
  static int count = 1;
  return count;
}
}  // namespace detail

inline int worker_count() { return detail::worker_count_ref(); }

inline void set_worker_count(int count) {
  if (count < 1) throw InvalidInput("set_worker_count: count must be at least 1");
  detail::worker_count_ref() = count;
}

/// Runs fn(0..n-1), possibly concurrently. fn must only touch state owned
/// by its index. The first exception thrown by any item is rethrown here.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = detail::worker_count_ref();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::size_t>(workers, n));
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ganbench
