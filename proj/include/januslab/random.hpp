#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace januslab {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, counter), so estimates are reproducible regardless of the
// order or thread in which draws are made.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ ^ mix(counter * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
  }

  // Uniform on (0, 1): never returns exactly 0 or 1.
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on two decorrelated uniforms.
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

// Named streams keep independent consumers of one seed from overlapping.
namespace streams {
inline constexpr std::uint64_t kFieldInit = 1;
inline constexpr std::uint64_t kCamera = 2;
inline constexpr std::uint64_t kSigma = 3;
inline constexpr std::uint64_t kPaas = 4;
}  // namespace streams

}  // namespace januslab
