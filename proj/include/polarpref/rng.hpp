#pragma once

#include <cstdint>
#include <string_view>

namespace polarpref::rng {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a string; used to key streams by identifiers.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derives a stream key from a parent key and one component. Chaining
/// derive() gives keys for tuples like (seed, epoch, dialogue id).
constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t component) {
  return mix64(parent ^ mix64(component + 0x632BE59BD9B4E019ULL));
}

/// Counter-based generator: the i-th output is a pure function of (key, i),
/// so any element of any stream can be computed without touching the others.
/// Output is identical across platforms and standard libraries.
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  constexpr std::uint64_t next() { return mix64(key_ ^ mix64(counter_++)); }

  /// Unbiased integer in [0, bound). bound must be > 0.
  constexpr std::uint64_t uniform(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace polarpref::rng
