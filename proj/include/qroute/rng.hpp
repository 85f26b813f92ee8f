#pragma once

#include <cstdint>

namespace qroute {

// Shared deterministic generator: splitmix64 with the golden-ratio increment.
// Every module draws from this so a seed pins an entire run, and seeded runs
// are comparable across implementations of the same contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // output / 2^64. Rounding can produce exactly 1.0 for outputs within
  // half an ulp of 2^64; consumers of ranges must clamp.
  double uniform01() { return static_cast<double>(next()) * 0x1p-64; }

  // Uniform integer in [0, n), n > 0. Fixed-point multiply, no rejection.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Child seed derivation: absorb the salt into the state and advance once.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return Rng(seed + salt).next();
}

}  // namespace qroute
