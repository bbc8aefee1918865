#include "polyjoin/prf.hpp"

#include <stdexcept>

namespace polyjoin {

namespace {

// floor division by 64 on a signed index.
inline i128 block_of(i128 index) { return index >> 6; }
inline int bit_in_block(i128 index) { return static_cast<int>(index & 63); }

}  // namespace

std::uint64_t read_bits(std::uint64_t seed, i128 index, int width, const PrfConstants& c) {
  if (width < 1 || width > 64) throw std::invalid_argument("read_bits: width must be in [1, 64]");
  const i128 block = block_of(index);
  const int r = bit_in_block(index);
  std::uint64_t top;
  if (r + width <= 64) {
    top = prf_word(seed, block, c) << r;
  } else {
    const u128 joined = (static_cast<u128>(prf_word(seed, block, c)) << 64) | prf_word(seed, block + 1, c);
    top = static_cast<std::uint64_t>((joined << r) >> 64);
  }
  return width == 64 ? top : top >> (64 - width);
}

UInt256 read_u256(std::uint64_t seed, i128 index, const PrfConstants& c) {
  const i128 block = block_of(index);
  const int r = bit_in_block(index);
  std::uint64_t w[5];
  for (int k = 0; k < 5; ++k) w[k] = prf_word(seed, block + k, c);
  UInt256 out = 0;
  for (int k = 0; k < 4; ++k) {
    std::uint64_t limb = w[k];
    if (r != 0) limb = (w[k] << r) | (w[k + 1] >> (64 - r));
    out = (out << 64) | UInt256(limb);
  }
  return out;
}

}  // namespace polyjoin
