#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace twdglm {

// Rows are cut into fixed chunks and partial results are merged by a
// fixed pairwise tree, so the sum does not depend on the thread count.
inline constexpr std::size_t kChunkRows = 2048;

int default_threads();

template <class T, class ChunkFn, class Combine>
T chunked_reduce(std::size_t n, int threads, T zero, ChunkFn&& chunk, Combine&& combine) {
  const std::size_t nchunks = (n + kChunkRows - 1) / kChunkRows;
  if (nchunks == 0) return zero;
  std::vector<T> parts(nchunks, zero);
  auto run = [&](std::size_t c) {
    const std::size_t lo = c * kChunkRows;
    const std::size_t hi = std::min(n, lo + kChunkRows);
    parts[c] = chunk(lo, hi);
  };
  const std::size_t nt = std::min<std::size_t>(std::max(threads, 1), nchunks);
  if (nt <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) run(c);
  } else {
    // Errors are kept per chunk so the lowest failing chunk is reported,
    // matching the serial path.
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nchunks);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < nchunks; c = next++) {
          try {
            run(c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  while (parts.size() > 1) {
    std::vector<T> merged;
    merged.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
      merged.push_back(combine(std::move(parts[i]), std::move(parts[i + 1])));
    if (parts.size() % 2 == 1) merged.push_back(std::move(parts.back()));
    parts = std::move(merged);
  }
  return std::move(parts.front());
}

}  // namespace twdglm
