#pragma once

#include <cstdint>

namespace betarec {

/// SplitMix64 counter-based generator (Steele/Lea/Flood mixing constants).
/// The state advances by the 64-bit golden-ratio increment; each output is a
/// bijective mix of the counter, so streams with distinct seeds are
/// independent for our purposes and every draw is reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [-1, 1): the top 53 bits form a dyadic rational in
  /// [0, 1), mapped affinely onto the symmetric interval.
  double uniform_symmetric() {
    const double u01 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return 2.0 * u01 - 1.0;
  }

 private:
  std::uint64_t state_;
};

/// Deterministic sub-stream derivation: feeds the tags through the SplitMix64
/// output function so (seed, a, b) -> stream seed is reproducible and
/// documented.  Used to give every (level, measurement) pair its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  SplitMix64 g(seed);
  const std::uint64_t s1 = g.next();
  SplitMix64 ga(s1 + 0x9E3779B97F4A7C15ull * (a + 1));
  const std::uint64_t s2 = ga.next();
  SplitMix64 gb(s2 + 0x9E3779B97F4A7C15ull * (b + 1));
  return gb.next();
}

}  // namespace betarec
