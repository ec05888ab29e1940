#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace ffnfold::par {

inline unsigned width() {
  unsigned w = std::thread::hardware_concurrency();
  if (w == 0) w = 1;
  if (const char* env = std::getenv("FFNFOLD_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < w)
      w = static_cast<unsigned>(cap);
  }
  return w;
}

// Static block partition; body(i) must only write to slot i of
// preallocated output, keeping results order-independent.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& body) {
  const unsigned w = width();
  if (w <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(w, n);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += workers) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ffnfold::par
