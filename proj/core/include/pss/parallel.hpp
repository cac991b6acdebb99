#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pss {

/// Resolves a thread-count request: 0 means PSSNET_THREADS if set, otherwise
/// the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count, and each index is handled by
/// exactly one call, so writers with disjoint per-index slots stay
/// deterministic. The first exception thrown by a worker is rethrown.
template <class Fn>
void parallel_for_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned t = std::max(1u, std::min<unsigned>(resolve_threads(threads),
                                                     static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (t == 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  const std::size_t chunk = (n + t - 1) / t;
  for (unsigned w = 0; w < t; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_for_chunks(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace pss
