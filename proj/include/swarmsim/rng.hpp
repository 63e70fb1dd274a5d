#pragma once

#include <cmath>
#include <cstdint>

namespace swarmsim {

// Deterministic xoshiro256** generator. std:: distributions are not pinned
// across library versions, so sampling is done here with explicit formulas;
// the same (seed, call sequence) reproduces the same stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 seeding
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) without modulo bias (bound > 0).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller. One fresh pair of uniforms per call;
  // the spare is discarded to keep the stream position independent of
  // call interleaving.
  double next_normal() {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Lognormal with the given median (= exp(mu)) and shape sigma.
  double next_lognormal(double median, double sigma) {
    if (median <= 0.0) return 0.0;
    if (sigma <= 0.0) return median;
    return median * std::exp(sigma * next_normal());
  }

  bool next_bool(double p_true) { return next_unit() < p_true; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace swarmsim
