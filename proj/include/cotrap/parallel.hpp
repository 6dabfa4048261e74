#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cotrap {

/**
 * Calls fn(i) for i in [0, n) on up to `workers` threads. Work is claimed
 * in small chunks from a shared counter, so results must be written by
 * index; the first exception is rethrown on the caller's thread.
 */
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn, std::size_t chunk = 1) {
  if (n == 0) return;
  workers = std::max(1u, workers);
  if (workers == 1 || n <= chunk) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t start = next.fetch_add(chunk);
      if (start >= n) return;
      const std::size_t stop = std::min(n, start + chunk);
      try {
        for (std::size_t i = start; i < stop; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  pool.reserve(nt);
  for (unsigned w = 0; w < nt; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace cotrap
