#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace uavedge {

// Seeded PRNG with platform-independent derived distributions. The standard
// <random> distributions are implementation-defined, so uniform draws are
// built directly on the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 mixing of (seed, stream) so that sub-components of one run get
// decorrelated, reproducible seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace uavedge
