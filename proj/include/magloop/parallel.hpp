#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace magloop {

  /// Runs fn(i) for i in [0, n). Each index must write only its own output slot, so results do not
  /// depend on the worker count.
  template <class Fn>
  void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      });
    }
    for (auto& th : pool) th.join();
  }

}  // namespace magloop
