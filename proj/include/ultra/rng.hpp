#pragma once

#include <array>
#include <cstdint>

#include "ultra/core.hpp"

namespace ultra {

/// 64-bit key for a (master, path) pair. Path order and length both matter.
std::uint64_t substream_key(const Seed& seed) noexcept;

/// xoshiro256** seeded through splitmix64 from `substream_key`, with a
/// Marsaglia polar Gaussian sampler. Bit-reproducible on IEEE-754 targets.
class GaussianStream {
 public:
  explicit GaussianStream(const Seed& seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  /// Standard normal.
  double next_normal() noexcept;
  double next_normal(double mean, double sd) noexcept { return mean + sd * next_normal(); }

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ultra
