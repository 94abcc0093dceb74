// Deterministic random helpers.
//
// std::uniform_int_distribution and friends are implementation defined, so all
// sampling here is fixed arithmetic on raw mt19937_64 output. Artifacts written
// from the same seed are byte-identical on any conforming standard library.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace skm {

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n), n > 0. Unbiased via rejection below 2^64 mod n.
  uint64_t next_below(uint64_t n) {
    uint64_t t = (0 - n) % n;
    for (;;) {
      uint64_t x = eng_();
      if (x >= t) return x % n;
    }
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

// First k entries of a uniform random permutation of [0, n) in draw order.
inline std::vector<uint32_t> sample_without_replacement(uint64_t n, uint64_t k, Rng& rng) {
  std::vector<uint32_t> pool(n);
  for (uint64_t i = 0; i < n; ++i) pool[i] = static_cast<uint32_t>(i);
  std::vector<uint32_t> out;
  out.reserve(k);
  for (uint64_t i = 0; i < k; ++i) {
    uint64_t j = i + rng.next_below(n - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace skm
