#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "levsense/constants.hpp"

namespace levsense {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output
/// block for counter c under key k is a pure function of (k, c), so any
/// stretch of a stream can be generated independently.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(std::uint64_t counter_lo, std::uint64_t counter_hi = 0) const {
    Block ctr{static_cast<std::uint32_t>(counter_lo), static_cast<std::uint32_t>(counter_lo >> 32),
              static_cast<std::uint32_t>(counter_hi), static_cast<std::uint32_t>(counter_hi >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  std::array<std::uint32_t, 2> key_;
};

/// Standard normal pairs indexed by position in the stream: normals(i)
/// depends only on (seed, stream, i).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream) : philox_(seed), stream_(stream) {}

  /// Two independent N(0, 1) variates for index i (Box-Muller on 53-bit uniforms).
  std::array<double, 2> normals(std::uint64_t i) const {
    const auto b = philox_(i, stream_);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = constants::two_pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  // (0, 1]: never returns 0, so log stays finite.
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  Philox4x32 philox_;
  std::uint64_t stream_;
};

}  // namespace levsense
