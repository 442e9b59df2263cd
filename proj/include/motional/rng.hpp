#pragma once

// Counter-based pseudorandom draws. Every draw is a pure function of
// (seed, stream, step), so trajectories and grid points can be sampled
// in any order, on any number of threads, with identical results.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace motional {
namespace rng {

// SplitMix64 finalizer.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t step) {
  std::uint64_t h = mix(seed ^ 0x6D6F74696F6E616Cull);
  h = mix(h ^ stream);
  h = mix(h ^ step);
  return h;
}

// Uniform in (0, 1); never returns 0 or 1.
inline double u01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t step) {
  return u01(key(seed, stream, step));
}

// Standard normal via Box-Muller on two decorrelated sub-keys.
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t step) {
  const std::uint64_t h = key(seed, stream, step);
  const double u1 = u01(mix(h + 0x9E3779B97F4A7C15ull));
  const double u2 = u01(mix(h + 0x3C6EF372FE94F82Aull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Binomial(shots, p) as a sum of counter-indexed Bernoulli trials.
inline long binomial(std::uint64_t seed, std::uint64_t stream, long shots,
                     double p) {
  if (shots <= 0) throw std::domain_error("binomial: shots must be positive");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return shots;
  long count = 0;
  for (long s = 0; s < shots; ++s) {
    if (uniform(seed, stream, static_cast<std::uint64_t>(s)) < p) ++count;
  }
  return count;
}

}  // namespace rng
}  // namespace motional
