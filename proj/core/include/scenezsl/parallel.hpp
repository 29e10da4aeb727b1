#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace scenezsl {

/// Runs body(i) for i in [0, n). Indices are split into `threads` contiguous
/// chunks; chunk t always receives the same index range for a given
/// (n, threads), so per-chunk reductions are reproducible. The first
/// exception thrown by any chunk is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = n * t / threads;
      const std::size_t end = n * (t + 1) / threads;
      workers.emplace_back([&, t, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Like parallel_for but hands each worker its chunk: body(chunk, begin, end).
/// Returns the number of chunks used.
template <typename Body>
std::size_t parallel_chunks(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  parallel_for(threads, threads, [&](std::size_t t) {
    body(t, n * t / threads, n * (t + 1) / threads);
  });
  return threads;
}

}  // namespace scenezsl
