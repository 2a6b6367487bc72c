#pragma once

#include <cstdint>

namespace rdcnn {

/// Deterministic, platform-independent generator (splitmix64). The value
/// stream for a given seed is part of the reproducibility contract:
/// initializers consume it row-major, the whole u layer first, then v,
/// one draw per cell.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0,1) with a full 53-bit mantissa.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [0,1) with a full 24-bit mantissa.
  float next_float() { return float(next_u64() >> 40) * 0x1.0p-24f; }

  /// Uniform on [0,1) in the requested precision; consumes one u64 either way.
  template <class T>
  T next_unit() {
    if constexpr (sizeof(T) == 4)
      return next_float();
    else
      return next_double();
  }

 private:
  uint64_t state_;
};

}  // namespace rdcnn
