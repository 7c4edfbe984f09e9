#pragma once

// Portable pseudo-random primitives. Golden files depend on these exact
// algorithms, so nothing here may delegate to std:: distributions (their
// output is implementation-defined).
//
//   seeding:   SplitMix64 (Steele, Lea, Flood 2014)
//   generator: xoshiro256** 1.0 (Blackman, Vigna 2018)
//   uniform:   53-bit mantissa fill, unbiased integer ranges by rejection
//   normal:    Box-Muller, both outputs used, second one cached
//   hashing:   FNV-1a 64 over UTF-8 bytes, finalized with SplitMix64

#include <array>
#include <cstdint>
#include <string_view>

namespace denoiser {

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, stream id). Used for the
// per-class noise generators and per-class world samples.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64_next(s);
  std::uint64_t t = a ^ (stream * 0xD6E8FEB86659FD93ull);
  return splitmix64_next(t);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Seeded hash of a string: stable across platforms and processes.
constexpr std::uint64_t seeded_hash(std::uint64_t seed, std::string_view bytes) noexcept {
  return derive_seed(seed, fnv1a64(bytes));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  double normal() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace denoiser
