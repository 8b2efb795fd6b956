#ifndef CSYNC_RNG_HPP
#define CSYNC_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>

#include "csync/angles.hpp"

namespace csync {

/// splitmix64 finalizer; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream-splitting rule: stream i of a base seed is
///   splitmix64(base + (i + 1) * 0x9E3779B97F4A7C15).
/// Adding replicates or roles never perturbs earlier streams.
inline std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Seeded generator with portable value derivation. The engine is
/// std::mt19937_64; uniform/normal transforms are implemented here rather
/// than with std::*_distribution so that sequences are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double angle() { return uniform(0.0, kTwoPi); }

  /// Standard Box-Muller; consumes two uniforms per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    return mean + stddev * z;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace csync

#endif  // CSYNC_RNG_HPP
