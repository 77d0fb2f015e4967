#pragma once

#include <array>
#include <cstdint>

namespace polyrto {

/// Philox4x32-10 counter-based generator. Every draw is a pure function of
/// (key, counter), so streams can be split across threads without changing
/// the values drawn.
class Philox {
 public:
  using Counter = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const noexcept;

  /// Uniform double in the open interval (0,1) for draw `index` of `stream`.
  double uniform(std::uint64_t stream, std::uint64_t index) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
};

}  // namespace polyrto
