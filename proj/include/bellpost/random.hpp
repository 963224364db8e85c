#pragma once

#include <cstdint>

namespace bellpost {

// SplitMix64 generator. Small, seedable, and identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Independent stream for a sub-task (restart, grid cell, ...) of a seeded run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 g(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
  return g.next();
}

}  // namespace bellpost
