#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace condwalk {

/// Runs fn(block, begin, end) over fixed-size blocks of [0, n). The block
/// partition depends only on n and block_size, never on the thread count,
/// so per-block results reduced in block order are reproducible.
template <class Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t blocks = (n + block_size - 1) / block_size;
  auto run = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    fn(b, begin, std::min(n, begin + block_size));
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += workers) run(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
  return (n + block_size - 1) / block_size;
}

}  // namespace condwalk
