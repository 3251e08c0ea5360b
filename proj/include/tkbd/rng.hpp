#pragma once

#include <cstdint>
#include <initializer_list>

namespace tkbd {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of an independent stream: master seed folded with a path of stream
// ids, e.g. derive_seed(master, {run, kStreamTracker}).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (auto id : path) s = mix64(s ^ mix64(id + 0x632be59bd9b4e019ULL));
  return s;
}

namespace stream {
inline constexpr std::uint64_t noise = 1;
inline constexpr std::uint64_t signal = 2;
inline constexpr std::uint64_t tracker = 3;
inline constexpr std::uint64_t dataset = 4;
inline constexpr std::uint64_t ambient_model = 5;
}  // namespace stream

}  // namespace tkbd
