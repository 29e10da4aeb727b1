#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace scenezsl {

/// SplitMix64 finalizer. Used to fold (seed, epoch, index, ...) tuples into a
/// single 64-bit key.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a path of indices, e.g.
/// derive_seed(global, {epoch, iteration, sample}).
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t p : path) {
    h = mix64(h ^ mix64(p + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). The stream is fully determined by the 64-bit
/// key; the 128-bit counter advances by one per block of four 32-bit outputs.
///
/// All distribution helpers are implemented here rather than via <random>
/// distributions, whose output is implementation-defined.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next_u64(); }

  std::uint32_t next_u32() noexcept {
    if (buffered_ == 0) {
      refill();
    }
    return block_[4 - buffered_--];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal via Box-Muller; caches the second variate.
  double normal() noexcept;

  /// One Philox4x32-10 block for an explicit counter and key.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

  /// Number of 32-bit words consumed so far.
  std::uint64_t position() const noexcept { return blocks_ * 4 - buffered_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  std::uint64_t blocks_ = 0;
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Fisher-Yates shuffle driven by Philox::below.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Philox& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace scenezsl
