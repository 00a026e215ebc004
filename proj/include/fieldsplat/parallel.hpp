// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fieldsplat {

// Worker threads used by the renderers and trainers. Work is always split
// into chunks whose boundaries depend only on the problem size, and any
// reductions are merged in chunk order, so results are identical for every
// thread count.
inline std::atomic<int>& thread_count_storage() {
  static std::atomic<int> n{static_cast<int>(std::thread::hardware_concurrency())};
  return n;
}

inline int thread_count() {
  int n = thread_count_storage().load();
  return n > 0 ? n : 1;
}

inline void set_thread_count(int n) { thread_count_storage().store(n > 0 ? n : 1); }

// Runs fn(begin, end, chunk_index) over [0, n) in chunks of chunk_size.
// Chunks are claimed from a shared counter; fn must only write to
// chunk-indexed or element-indexed slots.
template <typename Fn>
void parallel_chunks(size_t n, size_t chunk_size, Fn&& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  const int n_threads = static_cast<int>(std::min<size_t>(thread_count(), n_chunks));
  if (n_threads <= 1) {
    for (size_t c = 0; c < n_chunks; ++c) {
      fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const size_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      try {
        fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n_threads - 1);
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

// Convenience: parallel loop over rows of an image-like range.
template <typename Fn>
void parallel_rows(size_t n_rows, Fn&& fn) {
  parallel_chunks(n_rows, 1, [&](size_t begin, size_t, size_t) { fn(begin); });
}

}  // namespace fieldsplat
