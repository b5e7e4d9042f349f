#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "shuttle/constants.hpp"

namespace shuttle {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A block of four 32-bit words is a pure function of (counter, key), so any
/// position of any stream can be generated without touching shared state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kRounds = 10;

  static Block generate(Block counter, Key key) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      counter = round(counter, key);
    }
    return counter;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block round(const Block& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Standard normal variates from one Philox stream keyed by a 64-bit seed.
///
/// Block b uses counter (b_lo, b_hi, 0, 0); its two 64-bit halves become two
/// uniforms on (0, 1] and one Box-Muller pair.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : key_(Philox4x32::key_from_seed(seed)) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const Philox4x32::Block block = Philox4x32::generate(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), 0u, 0u},
        key_);
    ++block_;
    const std::uint64_t a = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    const std::uint64_t b = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
    const double u1 = to_unit_interval(a);
    const double u2 = to_unit_interval(b);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * constants::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // 53 random bits mapped to (0, 1].
  static double to_unit_interval(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shuttle
