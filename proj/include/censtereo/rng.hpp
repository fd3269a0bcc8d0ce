// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <cstdint>

namespace censtereo {

// splitmix64 step (Steele, Lea, Vigna). One 64-bit state word, full-avalanche
// output, no warm-up needed. This is the project-wide PRNG: per-pixel streams
// are seeded as (seed XOR pixel index) so results never depend on the order
// pixels are visited.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are generated together.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson sample. Knuth's product method below lambda = 10, transformed
  // rejection (Hoermann's PTRS) above it, so the cost stays O(1) at the
  // electron counts a full-well sensor model produces.
  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 10.0) {
      const double limit = std::exp(-lambda);
      long k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    return poisson_ptrs(lambda);
  }

 private:
  long poisson_ptrs(double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform();
      double us = 0.5 - std::fabs(u);
      long k = long(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
      if (us >= 0.07 && v <= vr) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          -lambda + k * loglam - std::lgamma(k + 1.0))
        return k;
    }
  }

  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream for one pixel of one frame: all randomness a pixel consumes comes
// from this generator, independent of every other pixel.
inline Rng pixel_rng(uint64_t seed, uint64_t pixel_index) {
  return Rng(seed ^ pixel_index);
}

}  // namespace censtereo
