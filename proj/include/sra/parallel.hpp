#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sra {

/// Runs fn(begin, end) over fixed-size chunks of [0, total). Chunk boundaries
/// depend only on `total`, and each replicate writes results keyed by its own
/// index, so outputs are identical for any worker count.
inline void parallel_chunks(std::uint64_t total, int workers,
                            const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
  constexpr std::uint64_t kChunk = 256;
  if (workers <= 1 || total <= kChunk) {
    fn(0, total);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (;;) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= total) return;
        fn(begin, std::min(begin + kChunk, total));
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace sra
