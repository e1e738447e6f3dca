#pragma once

#include <cstdint>
#include <random>

namespace relnav {

/// splitmix64 mix step, used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t cycle) {
  return mix64(mix64(seed ^ mix64(stream)) ^ cycle);
}

/// Deterministic draws independent of the platform's distribution
/// implementations: uniforms from the top 53 bits of mt19937_64, normals via
/// Box-Muller. Sensors construct one per (seed, stream, cycle), so a repeated
/// read at the same cycle returns identical values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t cycle)
      : gen_(substream_seed(seed, stream, cycle)) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_{false};
  double spare_{0.0};
};

/// Sensor substream identifiers (stable across runs; part of the log contract).
namespace stream {
inline constexpr std::uint64_t kImu = 1;
inline constexpr std::uint64_t kBaro = 2;
inline constexpr std::uint64_t kVelocity = 3;
inline constexpr std::uint64_t kDetector = 4;
inline constexpr std::uint64_t kBiasWalk = 5;
inline constexpr std::uint64_t kInit = 6;
}  // namespace stream

}  // namespace relnav
