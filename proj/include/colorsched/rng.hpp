#pragma once

#include <cstdint>
#include <random>

namespace colorsched {

// splitmix64 step; used to fan a master seed out into independent streams.
// The standard distributions are deliberately avoided everywhere: their
// algorithms are implementation-defined, and sweep output must be
// byte-identical across toolchains. Only the raw mt19937_64 sequence (which
// the standard pins down exactly) plus the mappings below are used.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive a child seed from (seed, tag) pairs, e.g. one stream per sample.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0xd1342543de82ef95ull * (tag + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag1,
                                 std::uint64_t tag2) {
  return derive_seed(derive_seed(seed, tag1), tag2);
}

class rng {
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound), unbiased via rejection. bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    // Largest multiple of bound that fits in 64 bits.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace colorsched
