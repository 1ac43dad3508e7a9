// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mimo_ae/types.hpp"

namespace mimo_ae {

// Purpose tags for substream derivation. Values are part of the
// reproducibility contract; never renumber.
enum class StreamTag : std::uint64_t {
  kChannel = 1,
  kSymbols = 2,
  kNoise = 3,
  kAeInit = 4,
  kTest = 99,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the independent stream for (master_seed, block_id, tag). Pure, so
/// blocks can be generated in any order or on any thread.
constexpr std::uint64_t substream_seed(std::uint64_t master_seed,
                                       std::uint64_t block_id, StreamTag tag,
                                       std::uint64_t extra = 0) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ block_id);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  return mix64(h ^ extra);
}

/// Seeded random stream. Distribution transforms are written out here rather
/// than taken from <random> so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return engine_() % n; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mimo_ae
