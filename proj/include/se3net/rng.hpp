#pragma once

#include <cmath>
#include <cstdint>

namespace se3net {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Counter-based generator: output depends only on the input word, so
// per-element draws stay deterministic regardless of evaluation order.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9E3779B97F4A7C15ULL + b + (a << 6) + (a >> 2)));
}

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

// Uniform in [0,1) from the top 53 bits of a word.
inline double u01(uint64_t bits) { return (bits >> 11) * 0x1.0p-53; }

// Standard normal draw addressed by (seed, index), Box-Muller.
inline double gaussian_at(uint64_t seed, uint64_t index) {
  uint64_t s = mix_seed(seed, index);
  double u1 = u01(splitmix64(s));
  double u2 = u01(splitmix64(s ^ 0x632BE59BD9B4E019ULL));
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// Uniform in [lo,hi) addressed by (seed, index).
inline double uniform_at(uint64_t seed, uint64_t index, double lo, double hi) {
  return lo + (hi - lo) * u01(mix_seed(seed, index));
}

}  // namespace se3net
