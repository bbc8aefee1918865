#pragma once

// Stateless counter-based bit streams. Bit i of the stream keyed by `seed`
// is bit (63 - i mod 64) of prf_word(seed, floor(i / 64)), so a point of the
// two-sided shift is just (seed, offset) and T^n is offset + n.
//
// The constants are published in CONSTANTS.md; every implementation must
// reproduce the golden vectors listed there bit for bit.

#include <cstdint>

#include "polyjoin/integer.hpp"

namespace polyjoin {

struct PrfConstants {
  std::uint64_t seed_offset = 0x9e3779b97f4a7c15ULL;
  std::uint64_t lo_offset = 0xd1b54a32d192ed03ULL;
  std::uint64_t hi_offset = 0x8cb92ba72f3d8dd7ULL;
  std::uint64_t mul1 = 0xbf58476d1ce4e5b9ULL;
  std::uint64_t mul2 = 0x94d049bb133111ebULL;

  friend bool operator==(const PrfConstants&, const PrfConstants&) = default;
};

inline constexpr PrfConstants kPublishedPrf{};

constexpr std::uint64_t mix64(std::uint64_t z, const PrfConstants& c = kPublishedPrf) {
  z ^= z >> 30;
  z *= c.mul1;
  z ^= z >> 27;
  z *= c.mul2;
  z ^= z >> 31;
  return z;
}

/// 64 pseudorandom bits for (seed, block). Blocks are signed 128-bit.
constexpr std::uint64_t prf_word(std::uint64_t seed, i128 block,
                                 const PrfConstants& c = kPublishedPrf) {
  const auto ub = static_cast<u128>(block);
  const auto lo = static_cast<std::uint64_t>(ub);
  const auto hi = static_cast<std::uint64_t>(ub >> 64);
  std::uint64_t h = mix64(seed + c.seed_offset, c);
  h = mix64(h ^ (lo + c.lo_offset), c);
  h = mix64(h ^ (hi + c.hi_offset), c);
  return h;
}

/// Child seed used when a scenario needs many independent sample points.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                    const PrfConstants& c = kPublishedPrf) {
  return prf_word(seed ^ 0x5851f42d4c957f2dULL, static_cast<i128>(index), c);
}

/// Reads `width` (1..64) bits starting at absolute bit index `index`; the
/// first bit read is the most significant bit of the result.
std::uint64_t read_bits(std::uint64_t seed, i128 index, int width,
                        const PrfConstants& c = kPublishedPrf);

/// Reads 256 bits starting at `index` as a binary fraction numerator.
UInt256 read_u256(std::uint64_t seed, i128 index, const PrfConstants& c = kPublishedPrf);

}  // namespace polyjoin
