// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_RNG_HPP
#define PASSGYM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace passgym::rl {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent generator for (seed, stream). Worker streams are
// stream = worker index so results do not depend on how many threads run.
inline std::mt19937_64 make_rng(uint64_t seed, uint64_t stream = 0) {
  uint64_t state = seed ^ (0x5851f42d4c957f2dull * (stream + 1));
  std::seed_seq seq{splitmix64(state), splitmix64(state), splitmix64(state),
                    splitmix64(state)};
  return std::mt19937_64(seq);
}

// Uniform draw in [0,1) from the top 53 bits; avoids the distribution
// classes so draws are identical across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).
inline int64_t uniform_index(std::mt19937_64& rng, int64_t n) {
  return static_cast<int64_t>(uniform01(rng) * static_cast<double>(n));
}

// Marsaglia polar method.
inline double normal(std::mt19937_64& rng) {
  for (;;) {
    double u = 2.0 * uniform01(rng) - 1.0;
    double v = 2.0 * uniform01(rng) - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

}  // namespace passgym::rl

#endif  // PASSGYM_RNG_HPP
