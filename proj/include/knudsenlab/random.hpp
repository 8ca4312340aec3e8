#pragma once

#include <cstdint>

namespace knudsenlab {

/// 64-bit linear congruential generator (Knuth MMIX constants):
///   state <- 6364136223846793005 * state + 1442695040888963407  (mod 2^64)
/// uniform() returns the top 53 bits scaled to [0, 1). The seed is the initial state.
/// Reproducible in any language with wrapping 64-bit unsigned arithmetic.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = kMultiplier * state_ + kIncrement;
    return state_;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

}  // namespace knudsenlab
