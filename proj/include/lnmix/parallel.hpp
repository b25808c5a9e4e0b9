#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lnmix {

// Work is split into fixed-size blocks that do not depend on the thread
// count; callers that reduce must do so per block and then combine block
// results in block order. That makes every reduction bitwise identical
// for any number of workers.
constexpr std::size_t kParallelBlock = 256;

inline std::size_t block_count(std::size_t n) { return (n + kParallelBlock - 1) / kParallelBlock; }

// Runs body(block_index, begin, end) for every block of [0, n).
inline void for_each_block(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t nblocks = block_count(n);
  if (threads <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      body(b, b * kParallelBlock, std::min(n, (b + 1) * kParallelBlock));
    return;
  }
  std::vector<std::thread> pool;
  const int nworkers = static_cast<int>(std::min<std::size_t>(threads, nblocks));
  pool.reserve(nworkers);
  for (int w = 0; w < nworkers; ++w) {
    pool.emplace_back([=, &body] {
      for (std::size_t b = w; b < nblocks; b += nworkers)
        body(b, b * kParallelBlock, std::min(n, (b + 1) * kParallelBlock));
    });
  }
  for (auto& t : pool) t.join();
}

// Sum of per-block partials combined in block order.
inline double reduce_blocks(std::size_t n, int threads, const std::function<double(std::size_t, std::size_t)>& partial) {
  const std::size_t nblocks = block_count(n);
  std::vector<double> parts(nblocks, 0.0);
  for_each_block(n, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) { parts[b] = partial(lo, hi); });
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

}  // namespace lnmix
