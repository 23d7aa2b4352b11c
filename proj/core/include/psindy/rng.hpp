#pragma once

#include <cstdint>

namespace psindy {

// xorshift64* (Vigna 2016) seeded through one round of splitmix64.
//
//   state  = splitmix64(seed)            (0 is remapped to 0x9E3779B97F4A7C15)
//   next   : x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D
//   uniform: (next() >> 11) * 2^-53, mapped affinely onto [lo, hi)
//
// The recipe is fixed so that other implementations can reproduce the random
// initial conditions of an experiment bit for bit.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    state_ = z != 0 ? z : 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace psindy
