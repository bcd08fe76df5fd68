#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wsisel/error.hpp"

// Fixed, explicitly specified PRNG stack (splitmix64-seeded xoshiro256**)
// so that every seeded run is reproducible bit-for-bit across platforms.
// All distribution helpers are hand-rolled for the same reason: standard
// library distributions are not portable across implementations.

namespace wsisel {

struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

/// Derive an independent stream seed from a base seed and one or two salts.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt_a,
                                 std::uint64_t salt_b = 0) {
  SplitMix64 mix(base ^ (salt_a * 0x9E3779B97F4A7C15ULL) ^
                 (salt_b * 0xD1B54A32D192ED03ULL));
  return mix.next();
}

class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    SplitMix64 mix(seed);
    for (auto& word : state_) word = mix.next();
  }

  std::uint64_t next() {
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

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw ConfigError("next_below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms per
  /// call and discards the paired variate, keeping the stream position
  /// independent of call interleaving.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

/// Gamma(shape, 1) variate, Marsaglia-Tsang squeeze method.
inline double sample_gamma(Xoshiro256ss& rng, double shape) {
  if (!(shape > 0.0)) throw ConfigError("sample_gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = 1.0 - rng.next_double();  // (0, 1]
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Dirichlet variate with per-component concentrations.
inline std::vector<double> sample_dirichlet(Xoshiro256ss& rng,
                                            const std::vector<double>& alphas) {
  std::vector<double> w(alphas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    w[i] = sample_gamma(rng, alphas[i]);
    total += w[i];
  }
  if (total <= 0.0) throw NumericError("sample_dirichlet: degenerate draw");
  for (double& x : w) x /= total;
  return w;
}

}  // namespace wsisel
