#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace carp {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for seeding and for
/// deriving per-run seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for run `run` of an ensemble with master seed `seed`:
///   splitmix64_mix(seed + 0x9E3779B97F4A7C15 * (run + 1))
/// Each run's seed depends only on (seed, run), so adding runs never changes
/// earlier trajectories.
constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t run) {
  return splitmix64_mix(seed + 0x9E3779B97F4A7C15ULL * (run + 1));
}

/// xoshiro256** 1.0 (Blackman & Vigna). State is filled from four successive
/// SplitMix64 outputs of the seed, as in the reference seeding procedure.
/// Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      word = splitmix64_mix(x);
    }
  }

  /// Generator with an explicit internal state (must not be all zero).
  static constexpr Xoshiro256 from_state(const std::array<std::uint64_t, 4>& state) {
    Xoshiro256 g;
    g.state_ = state;
    return g;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
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

  /// Uniform double in [0,1) from the top 53 bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound) by rejection.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace carp
