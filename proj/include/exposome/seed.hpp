#pragma once

#include <cstdint>
#include <string_view>

namespace exposome {

/// SplitMix64 finalizer. Used to decorrelate derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the index-th child (fold, tree, ...) of a seeded computation.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix_seed(base ^ mix_seed(index + 1));
}

/// Seed for a named pipeline stage.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view stage) noexcept {
  return mix_seed(base ^ fnv1a(stage));
}

}  // namespace exposome
