#pragma once

#include <cstdint>
#include <initializer_list>

namespace htile {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable hash of a key tuple. Order matters; used to derive per-edge and
/// per-instance seeds so results never depend on generation order.
constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Maps 64 random bits to the open interval (0, 1).
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential counter-based stream, for simulations that need many draws
/// from a single key.
class KeyedStream {
 public:
  constexpr explicit KeyedStream(std::uint64_t key) noexcept : key_(key) {}
  constexpr std::uint64_t next_bits() noexcept { return mix64(key_ ^ mix64(counter_++)); }
  constexpr double next_unit() noexcept { return open_unit(next_bits()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace htile
