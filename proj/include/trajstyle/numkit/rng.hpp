#pragma once

#include <cstddef>
#include <cstdint>

namespace trajstyle::numkit {

// Counter-based 64-bit generator: output i of a stream is a SplitMix64
// finalizer applied to (key + i * golden). Copying an Rng forks an identical
// stream; split() derives an independent one. Normals use Box-Muller without
// caching so a draw count fully determines the state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() noexcept { return mix(key_ + (counter_++) * kGolden); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  // Uniform integer in [0, n) by rejection; n must be > 0.
  std::size_t below(std::size_t n) noexcept;

  Rng split() noexcept { return Rng(next_u64(), 0); }

  std::uint64_t counter() const noexcept { return counter_; }
  bool operator==(const Rng&) const = default;

 private:
  Rng(std::uint64_t key, int) noexcept : key_(mix(key)) {}

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace trajstyle::numkit
