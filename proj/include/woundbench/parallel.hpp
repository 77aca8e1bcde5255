#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace woundbench {

/// Runs body(i) for i in [0, n) over static contiguous chunks. Callers write
/// results by index, so the outcome never depends on the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, std::max<std::size_t>(1, n / 1024));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) {
      break;
    }
    threads.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        body(i);
      }
    });
  }
}

} // namespace woundbench
