#pragma once

#include <cstdint>
#include <random>

namespace fdb {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a 64-bit key from a seed and a path of stream coordinates.
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::uint64_t a = 0,
                                   std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept
{
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(a + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ mix64(b + 0x8cb92ba72f3d8dd7ULL));
  h = mix64(h ^ mix64(c + 0xa0761d6478bd642fULL));
  return h;
}

/// Independent stream keyed by (seed, a, b, c). Streams for different keys
/// are unrelated, so replicate order and thread count never matter.
inline Engine make_stream(std::uint64_t seed,
                          std::uint64_t a = 0,
                          std::uint64_t b = 0,
                          std::uint64_t c = 0)
{
  return Engine{ derive_key(seed, a, b, c) };
}

// Stream tags used to separate resampling schemes drawn from one seed.
namespace stream_tag {
inline constexpr std::uint64_t series = 0x51;
inline constexpr std::uint64_t mpb = 0x52;
inline constexpr std::uint64_t cbp = 0x53;
inline constexpr std::uint64_t ar_sieve = 0x54;
inline constexpr std::uint64_t reference = 0x55;
inline constexpr std::uint64_t truth = 0x56;
} // namespace stream_tag

} // namespace fdb
