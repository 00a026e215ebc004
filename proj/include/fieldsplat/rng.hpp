// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fieldsplat {

// splitmix64; used as a counter-based generator so that per-pixel /
// per-sample jitter is independent of evaluation order and thread count.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t h = splitmix64(seed ^ 0x2545f4914f6cdd1dULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

inline double to_unit_double(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stratification offset in [0,1) for sample `sample` of element `element`
// (pixel or ray index) in stream `stream` (iteration, image, ...).
inline double stratified_offset(uint64_t seed, uint64_t stream, uint64_t element,
                                uint64_t sample) {
  return to_unit_double(hash_combine(seed, stream, element, sample));
}

// Sequential generator for batch sampling and shuffles. mt19937_64 output is
// pinned by the standard, so traces are reproducible across platforms; the
// [0,n) mapping below avoids std::uniform_int_distribution, whose mapping is
// implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased only up to 2^-64, which is fine for sampling work.
  uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  double next_unit() { return to_unit_double(next_u64()); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fieldsplat
