#pragma once

#include <cstdint>
#include <random>

namespace varpro {

/// Seeded uniform generator. Doubles are derived from raw mt19937_64 output
/// instead of std::uniform_real_distribution, whose stream is
/// implementation-defined; this keeps generated datasets identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace varpro
