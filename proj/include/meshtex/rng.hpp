// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace meshtex {

// splitmix64 finalizer. Full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

inline double u64_to_unit_double(uint64_t x) {
  // 53 mantissa bits -> [0,1)
  return double(x >> 11) * 0x1.0p-53;
}

// Stateless counter-based stream: value `draw` of stream `index` under `seed`.
// Parallel-safe; the result depends only on the three keys.
inline uint64_t hash_rng(uint64_t seed, uint64_t index, uint64_t draw) {
  return mix64(seed + 0x9e3779b97f4a7c15ull * mix64(index + 0xd1b54a32d192ed03ull * mix64(draw + 1)));
}

inline double hash_unit(uint64_t seed, uint64_t index, uint64_t draw) {
  return u64_to_unit_double(hash_rng(seed, index, draw));
}

// Sequential splitmix64 generator. Deterministic across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0,1).
  double next_double() { return u64_to_unit_double(next_u64()); }

  // Uniform in [lo,hi).
  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform in [0,n).
  uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

  // Standard normal via Box-Muller.
  double next_gaussian();

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0;
};

inline double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0, u2 = 0, r2 = 0;
  do {
    u1 = 2.0 * next_double() - 1.0;
    u2 = 2.0 * next_double() - 1.0;
    r2 = u1 * u1 + u2 * u2;
  } while (r2 >= 1.0 || r2 == 0.0);
  auto f = std::sqrt(-2.0 * std::log(r2) / r2);
  spare_ = u2 * f;
  has_spare_ = true;
  return u1 * f;
}

}  // namespace meshtex
