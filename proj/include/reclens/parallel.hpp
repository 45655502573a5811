#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace reclens {

// Worker count from an explicit request, falling back to RECLENS_THREADS and
// then to the machine's parallelism. Never returns 0.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RECLENS_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, n) into at most `threads` contiguous chunks and runs
// fn(chunk_index, begin, end) on each. Chunk boundaries depend only on n and
// threads. The first exception thrown by any chunk is rethrown.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t begin = n * c / chunks;
    std::size_t end = n * (c + 1) / chunks;
    workers.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace reclens
