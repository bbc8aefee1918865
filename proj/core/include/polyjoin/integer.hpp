#pragma once

// Exact arithmetic used throughout: arbitrary-precision integers and
// rationals for polynomial values, and fixed-width unsigned words for
// circle coordinates.

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace polyjoin {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using u128 = unsigned __int128;
using i128 = __int128;
using UInt256 = boost::multiprecision::uint256_t;

/// Generalized binomial coefficient C(n, k) = n(n-1)...(n-k+1)/k!, valid
/// for negative n.
Integer binomial(const Integer& n, unsigned k);

/// Floor-mod of v into [0, m).
std::uint64_t mod_u64(const Integer& v, std::uint64_t m);

/// v mod 2^128 as a two's complement word.
u128 low_u128(const Integer& v);

/// v mod 2^256.
UInt256 low_u256(const Integer& v);

/// Returns true and stores v when it fits a signed 128-bit word.
bool fits_i128(const Integer& v, i128& out);

Integer from_i128(i128 v);

Integer parse_integer(std::string_view text);
std::string to_string(const Integer& v);
std::string to_string(const Rational& v);

std::string to_hex(u128 v, int bits = 128);
std::string to_hex(const UInt256& v);
u128 parse_hex_u128(std::string_view text);
UInt256 parse_hex_u256(std::string_view text);

/// Mask with the low `bits` bits set (bits in [1, 128]).
constexpr u128 low_mask(int bits) {
  return bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1);
}

double to_double(const Rational& v);

}  // namespace polyjoin
