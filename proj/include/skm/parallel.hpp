// Static block partitioning over an index range.
//
// Results must never depend on the worker count: callers keep per-item or
// per-worker outputs and merge them in worker order after the join. Floating
// point reductions that must stay byte-stable across worker counts are done
// per item into an array and summed sequentially by the caller.
#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace skm {

inline unsigned default_threads() {
  unsigned h = std::thread::hardware_concurrency();
  return h ? h : 1u;
}

template <class F>
void parallel_blocks(std::size_t n, unsigned workers, F&& fn) {
  if (n == 0) return;
  std::size_t w = std::max(1u, workers);
  w = std::min<std::size_t>(w, n);
  if (w == 1) {
    fn(0u, std::size_t{0}, n);
    return;
  }
  std::size_t chunk = n / w;
  std::size_t rem = n % w;
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < w; ++i) {
    std::size_t end = begin + chunk + (i < rem ? 1 : 0);
    pool.emplace_back([&fn, i, begin, end] { fn(static_cast<unsigned>(i), begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace skm
