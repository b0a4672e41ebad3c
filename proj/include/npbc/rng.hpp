#pragma once

#include <cstdint>

namespace npbc {

// Counter-based stream: output i of stream s is a pure function of
// (master_seed, s, i), so parallel consumers are reproducible regardless of
// scheduling, and streams can be split without coordination.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_(mix(master_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1))) {}

  std::uint64_t next_u64() {
    return mix(key_ ^ (0xD1B54A32D192ED03ULL * ++counter_));
  }

  // Uniform on [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace npbc
