#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "vrtc/errors.hpp"

namespace vrtc {

// splitmix64 step (public-domain mixer by Vigna). Advances `state` and
// returns the mixed output. Used as the project-wide PRNG core so every
// random draw is reproducible across platforms from a single u64 seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent child seed from a master seed and a path of
// indices (component id, stream id, repeat id, ...). Distinct paths give
// uncorrelated streams; the same path always gives the same seed.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t s = master;
  for (uint64_t x : path) {
    uint64_t st = s ^ (x * 0xd1b54a32d192ed03ull);
    s = splitmix64(st);
  }
  return s;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform double in [0, 1), 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), unbiased via rejection sampling.
  uint64_t next_below(uint64_t bound) {
    if (bound == 0) throw ContractError("next_below: bound must be positive");
    uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Exponential with the given mean, by inverse CDF. log1p(-u) with
  // u in [0,1) never hits log(0).
  double next_exponential(double mean) { return -mean * std::log1p(-next_unit()); }

 private:
  uint64_t state_;
};

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<size_t> random_permutation(size_t n, Rng& rng) {
  std::vector<size_t> p(n);
  for (size_t i = 0; i < n; ++i) p[i] = i;
  shuffle(p, rng);
  return p;
}

}  // namespace vrtc
