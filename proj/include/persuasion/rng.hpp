#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace persuasion {

/// splitmix64 output function; used to whiten seeds and derive streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream-splitting rule: replication / substream k of a base seed uses
/// splitmix64(base ^ (k+1) * golden-gamma). Distinct k give decorrelated
/// mt19937_64 seedings, and the mapping is stable across runs.
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::uint64_t stream) {
  return splitmix64(base_seed ^ ((stream + 1) * 0x9e3779b97f4a7c15ULL));
}

/// Seedable 64-bit generator with inverse-transform exponential draws.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Exponential with the given rate via inverse transform,
  /// -log(1 - U) / rate. Infinite when the rate is zero.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-uniform()) / rate;
  }

  /// Bernoulli(p).
  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace persuasion
