#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cvw {

// Worker count: CVW_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads.  Each index
// runs exactly once; results written by index keep the input order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace cvw
