#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace commoncv {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive combination of two words into one key.
constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Sub-stream identifier for the work unit `index` playing `role`.
constexpr std::uint64_t derive_stream_id(std::uint64_t index, std::uint64_t role) noexcept {
  return combine_keys(index, role);
}

// Roles used to separate the randomness of different consumers.
inline constexpr std::uint64_t kRolePivotal = 1;
inline constexpr std::uint64_t kRoleSimData = 2;
inline constexpr std::uint64_t kRoleSimPivotalSeed = 3;
inline constexpr std::uint64_t kRoleSimCell = 4;

/// A deterministic xoshiro256** stream keyed by (master_seed, stream_id).
///
/// The 256-bit state is filled by SplitMix64 started from
/// combine_keys(master_seed, stream_id); equal keys give equal sequences.
/// A stream is single-threaded; parallel work derives one stream per unit.
class SeededStream {
 public:
  using result_type = std::uint64_t;

  SeededStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  friend double standard_normal(SeededStream& stream) noexcept;

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// One N(0,1) draw (Marsaglia polar method; the second variate of each pair
/// is cached in the stream).
double standard_normal(SeededStream& stream) noexcept;

/// One Gamma(shape, 1) draw, shape > 0. Marsaglia-Tsang squeeze for
/// shape >= 1; shape < 1 is boosted through Gamma(shape + 1) * U^(1/shape).
double gamma_variate(SeededStream& stream, double shape);

/// One chi-square draw with df >= 1 degrees of freedom (2 * Gamma(df/2)).
/// Throws Error(InvalidDf) for df < 1. The result is strictly positive.
double chi_square(SeededStream& stream, std::int64_t df);

}  // namespace commoncv
