#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace csl {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A (seed, stream) pair names an independent sequence: the seed is the key
/// and the stream index occupies the upper half of the 128-bit counter. Every
/// draw is a pure function of (seed, stream, position), so work split across
/// threads by stream reproduces the sequential result exactly.
class Philox {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in the open interval (0, 1), 53 random bits.
  double uniform() noexcept;
  /// Standard normal by Box-Muller; platform independent unlike std::normal_distribution.
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Raw ten-round bijection, exposed for known-answer tests.
  static Block bijection(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace csl
