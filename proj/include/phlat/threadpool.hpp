#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "phlat/common.hpp"

namespace phlat {

/// Worker count: PHLAT_THREADS if set (>= 1), else the hardware concurrency.
inline int recommended_threads() {
  if (const char* env = std::getenv("PHLAT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      throw config_error("PHLAT_THREADS must be an integer in [1, 4096]");
    return int(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Fixed pool running index-based loops.  Work items are claimed from an
/// atomic counter; callers that need deterministic reductions write into
/// per-index slots and reduce sequentially afterwards.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) : threads_(threads < 1 ? 1 : threads) {}

  int threads() const { return threads_; }

  void parallel_for(int n, const std::function<void(int)>& fn) const {
    if (n <= 0) return;
    if (threads_ == 1 || n == 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next.store(n, std::memory_order_relaxed);  // drain remaining work
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int k = std::min(threads_, n);
    pool.reserve(std::size_t(k - 1));
    for (int t = 0; t < k - 1; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

 private:
  int threads_;
};

}  // namespace phlat
