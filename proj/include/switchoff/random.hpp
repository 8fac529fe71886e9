#pragma once

// Counter-based normal deviates. Deviate number `index` of stream
// (seed, stream_id) is a pure function of those three integers, so Monte-Carlo
// aggregates never depend on thread count or evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace switchoff {

/// Philox4x32-10 block cipher (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Random-access stream of standard normal deviates for one (seed, stream_id).
/// Each Philox block yields two 53-bit uniforms, turned into a Box-Muller pair.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  double operator[](std::uint64_t index) const noexcept {
    const std::uint64_t block = index / 2;
    if (block != cached_block_) {
      fill(block);
      cached_block_ = block;
    }
    return cached_[index % 2];
  }

 private:
  void fill(std::uint64_t block) const noexcept {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const auto bits = Philox4x32::generate(ctr, key_);
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    auto to53 = [](std::uint32_t hi, std::uint32_t lo) {
      return (std::uint64_t{hi} << 21) ^ (std::uint64_t{lo} >> 11);
    };
    // u1 in (0, 1] keeps the logarithm finite; u2 in [0, 1).
    const double u1 = (static_cast<double>(to53(bits[0], bits[1])) + 1.0) * kScale;
    const double u2 = static_cast<double>(to53(bits[2], bits[3])) * kScale;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = {radius * std::cos(angle), radius * std::sin(angle)};
  }

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  mutable std::uint64_t cached_block_ = ~std::uint64_t{0};
  mutable std::array<double, 2> cached_{};
};

inline std::vector<double> normal_deviates(std::uint64_t seed, std::uint64_t stream_id,
                                           std::size_t count) {
  NormalStream stream(seed, stream_id);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = stream[i];
  return out;
}

}  // namespace switchoff
