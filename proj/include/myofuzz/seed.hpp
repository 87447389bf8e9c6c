#pragma once

#include <cstdint>
#include <initializer_list>

namespace myofuzz {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based seed split: the child stream depends only on the master seed
// and the tag path, never on the order in which children are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(master);
  for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return s;
}

// Stable tags for the independent random streams of an experiment.
namespace stream {
inline constexpr std::uint64_t folds = 1;
inline constexpr std::uint64_t contamination = 2;
inline constexpr std::uint64_t nu_tuning = 3;
inline constexpr std::uint64_t k_tuning = 4;
inline constexpr std::uint64_t mixture = 5;
inline constexpr std::uint64_t synthetic = 6;
}  // namespace stream

}  // namespace myofuzz
