#ifndef STAB_PARALLEL_HPP
#define STAB_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace stab {

/// Thread cap: STAB_THREADS when set, otherwise hardware concurrency
/// (at most 8).
inline unsigned thread_cap() {
  if (const char* env = std::getenv("STAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : std::min(hw, 8u);
}

/// Runs fn(i) for i in [0, count).  Results must be written into
/// index-addressed slots by the caller, which keeps the merge
/// deterministic regardless of the thread count.
inline void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  const unsigned threads = std::min<size_t>(thread_cap(), count);
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stab

#endif  // STAB_PARALLEL_HPP
