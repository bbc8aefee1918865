#include "polyjoin/integer.hpp"

#include <limits>
#include <stdexcept>

namespace polyjoin {

namespace {

const Integer& two_pow(unsigned bits) {
  static const Integer p128 = Integer(1) << 128;
  static const Integer p256 = Integer(1) << 256;
  return bits == 128 ? p128 : p256;
}

const Integer kI64Min = std::numeric_limits<std::int64_t>::min();
const Integer kI64Max = std::numeric_limits<std::int64_t>::max();

}  // namespace

Integer binomial(const Integer& n, unsigned k) {
  Integer num = 1;
  Integer den = 1;
  for (unsigned i = 0; i < k; ++i) {
    num *= (n - i);
    den *= (i + 1);
  }
  return num / den;
}

std::uint64_t mod_u64(const Integer& v, std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("mod_u64: zero modulus");
  if (v >= kI64Min && v <= kI64Max) {
    const auto s = static_cast<std::int64_t>(v);
    const i128 r = static_cast<i128>(s) % static_cast<i128>(m);
    return static_cast<std::uint64_t>(r < 0 ? r + m : r);
  }
  Integer r = v % m;
  if (r < 0) r += m;
  return static_cast<std::uint64_t>(r);
}

u128 low_u128(const Integer& v) {
  if (v >= kI64Min && v <= kI64Max) {
    return static_cast<u128>(static_cast<i128>(static_cast<std::int64_t>(v)));
  }
  Integer r = v % two_pow(128);
  if (r < 0) r += two_pow(128);
  const auto lo = static_cast<std::uint64_t>(r & std::numeric_limits<std::uint64_t>::max());
  const auto hi = static_cast<std::uint64_t>(r >> 64);
  return (static_cast<u128>(hi) << 64) | lo;
}

UInt256 low_u256(const Integer& v) {
  if (v >= 0 && v <= kI64Max) return UInt256(static_cast<std::uint64_t>(v));
  Integer r = v % two_pow(256);
  if (r < 0) r += two_pow(256);
  return static_cast<UInt256>(r);
}

bool fits_i128(const Integer& v, i128& out) {
  static const Integer lo = -(Integer(1) << 127);
  static const Integer hi = (Integer(1) << 127) - 1;
  if (v < lo || v > hi) return false;
  out = static_cast<i128>(low_u128(v));
  return true;
}

Integer from_i128(i128 v) {
  const bool neg = v < 0;
  u128 mag = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  Integer r = static_cast<std::uint64_t>(mag >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(mag);
  return neg ? Integer(-r) : r;
}

Integer parse_integer(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty integer literal");
  try {
    return Integer(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid integer literal '" + s + "'");
  }
}

std::string to_string(const Integer& v) { return v.str(); }

std::string to_string(const Rational& v) {
  const Integer num = boost::multiprecision::numerator(v);
  const Integer den = boost::multiprecision::denominator(v);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string to_hex(u128 v, int bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int shift = bits - 4; shift >= 0; shift -= 4) {
    out.push_back(digits[static_cast<int>((v >> shift) & 0xF)]);
  }
  return "0x" + out;
}

std::string to_hex(const UInt256& v) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int shift = 252; shift >= 0; shift -= 4) {
    out.push_back(digits[static_cast<int>(static_cast<unsigned>((v >> shift) & 0xF))]);
  }
  return "0x" + out;
}

namespace {

template <class Word>
Word parse_hex_word(std::string_view text, int max_bits) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.empty() || static_cast<int>(text.size()) * 4 > max_bits) {
    throw std::invalid_argument("hex literal out of range: " + std::string(text));
  }
  Word v = 0;
  for (char c : text) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw std::invalid_argument("bad hex digit in " + std::string(text));
    v = (v << 4) | Word(d);
  }
  return v;
}

}  // namespace

u128 parse_hex_u128(std::string_view text) { return parse_hex_word<u128>(text, 128); }

UInt256 parse_hex_u256(std::string_view text) { return parse_hex_word<UInt256>(text, 256); }

double to_double(const Rational& v) { return v.convert_to<double>(); }

}  // namespace polyjoin
