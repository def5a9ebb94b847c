#pragma once

#include <cstdint>
#include <random>

namespace chainopt {

// splitmix64 step; used to derive independent seeds from (master, tag) pairs
// so that restarts, replications and evaluation batches get disjoint streams
// whose contents do not depend on scheduling order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x517cc1b727220a95ULL * (tag + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(mix_seed(seed, tag));
}

// Uniform double in [0, 1) built from the top 53 bits; bit-for-bit
// reproducible across platforms, unlike std::uniform_real_distribution.
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// +1 or -1 with equal probability.
inline double rademacher(std::mt19937_64& rng) {
  return (rng() & 1ULL) ? 1.0 : -1.0;
}

// Standard normal via Box-Muller on two u01 draws. Deterministic and
// stateless; the second Box-Muller value is discarded on purpose so the
// stream position only depends on the number of calls.
double standard_normal(std::mt19937_64& rng);

// Inverse of the standard normal CDF (rational approximation plus one
// Halley refinement). Accepts p in [0, 1]; returns -inf / +inf at the ends.
double inverse_normal_cdf(double p);

}  // namespace chainopt
