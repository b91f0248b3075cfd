#pragma once

#include <cmath>
#include <cstdint>

namespace ufg {

// SplitMix64 mixer. Used both as the stream-derivation hash and as the
// generator itself so results are identical on every platform (std::
// distributions are not portable across standard libraries).
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  // Derives an independent stream from (seed, a, b, c); the parts are folded
  // through the mixer so nearby ids do not produce correlated streams.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(seed);
    s = mix64(s ^ mix64(a + 0x243f6a8885a308d3ULL));
    s = mix64(s ^ mix64(b + 0x13198a2e03707344ULL));
    s = mix64(s ^ mix64(c + 0xa4093822299f31d0ULL));
    return Rng(s);
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n), unbiased via rejection.
  uint64_t next_below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one value per call, no caching, so the
  // draw sequence is a pure function of call order.
  double next_normal() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

  double next_normal(double mean, double stddev) {
    return mean + stddev * next_normal();
  }

  // Laplace(0, scale) via inverse CDF.
  double next_laplace(double scale) {
    const double u = next_double() - 0.5;
    const double sign = (u < 0.0) ? -1.0 : 1.0;
    double a = 1.0 - 2.0 * std::fabs(u);
    if (a <= 0.0) a = 0x1.0p-53;
    return -scale * sign * std::log(a);
  }

 private:
  uint64_t state_;
};

}  // namespace ufg
