#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace csmci {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit seed is the Philox key; the upper half of the 128-bit counter
/// selects an independent substream, so `Philox4x32(seed, chain)` gives every
/// chain its own reproducible stream regardless of execution order.
/// Satisfies UniformRandomBitGenerator with 64-bit outputs.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// The raw 10-round bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t block_index_ = 0;
  std::uint64_t stream_;
  Block buffer_{};
  int cursor_ = 2;  // in 64-bit words; 2 means the buffer is exhausted
};

/// SplitMix64 finalizer; used to derive child seeds from (master, index...).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

}  // namespace csmci
