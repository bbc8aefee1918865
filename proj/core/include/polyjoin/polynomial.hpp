#pragma once

// Integral polynomials in the binomial basis p(n) = sum_k c_k C(n, k), and
// the shift/equivalence combinatorics used to normalize polynomial families.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyjoin/integer.hpp"

namespace polyjoin {

class IntPolynomial {
 public:
  IntPolynomial();
  explicit IntPolynomial(std::vector<Integer> binomial_coeffs);

  static IntPolynomial constant(const Integer& c);
  static IntPolynomial linear(const Integer& slope);
  /// n^k.
  static IntPolynomial power(unsigned k);
  /// From monomial coefficients a_0..a_D; throws if the result is not
  /// integer-valued.
  static IntPolynomial from_monomial(const std::vector<Rational>& coeffs);
  /// Parses monomial form such as "n^2 + 6n", "n^2/2 - n/2", "-3*n^3 + 1".
  static IntPolynomial parse(std::string_view text);

  const std::vector<Integer>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_constant() const { return coeffs_.size() == 1; }
  bool is_linear() const { return coeffs_.size() == 2; }
  const Integer& leading() const { return coeffs_.back(); }

  Integer operator()(const Integer& n) const;
  Integer at(std::int64_t n) const { return (*this)(Integer(n)); }

  /// n -> p(n + j).
  IntPolynomial translated(const Integer& j) const;
  /// p^[j](n) = p(n + j) - p(j).
  IntPolynomial shift(const Integer& j) const;

  std::vector<Rational> monomial_coeffs() const;
  /// Canonical monomial rendering, e.g. "n^2 + 6n".
  std::string to_string() const;

  IntPolynomial operator+(const IntPolynomial& o) const;
  IntPolynomial operator-(const IntPolynomial& o) const;
  IntPolynomial operator*(const Integer& k) const;
  friend bool operator==(const IntPolynomial&, const IntPolynomial&) = default;

 private:
  void canonicalize();
  std::vector<Integer> coeffs_;
};

/// Evaluates p(n), p(n + 1), ... by stepping the finite-difference table.
class PolyStepper {
 public:
  PolyStepper(const IntPolynomial& p, const Integer& start);
  const Integer& value() const { return diffs_[0]; }
  void advance() {
    for (std::size_t k = 0; k + 1 < diffs_.size(); ++k) diffs_[k] += diffs_[k + 1];
  }

 private:
  std::vector<Integer> diffs_;
};

/// Least P >= 1 with p(n + P) = p(n) mod m for all n. Throws if the period
/// would exceed `cap` (default m * D!, bounded to 10^9).
std::uint64_t period_mod(const IntPolynomial& p, std::uint64_t m,
                         std::optional<std::uint64_t> cap = std::nullopt);

bool essentially_distinct(const IntPolynomial& p, const IntPolynomial& q);

/// Some t with p(u + t) - q(u) constant in u, or nullopt. Throws on constant
/// input.
std::optional<Integer> shift_equivalent(const IntPolynomial& p, const IntPolynomial& q);

class PolynomialFamily {
 public:
  PolynomialFamily() = default;
  /// Members must be non-constant.
  explicit PolynomialFamily(std::vector<IntPolynomial> members);

  std::size_t size() const { return members_.size(); }
  const IntPolynomial& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<IntPolynomial>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  std::vector<std::size_t> linear_indices() const;
  std::vector<std::size_t> nonlinear_indices() const;

 private:
  std::vector<IntPolynomial> members_;
};

enum class SpadeClause { None, ZeroConstant, LinearSlopes, NonlinearDegree, ShiftEquivalent };

struct SpadeReport {
  bool ok = true;
  SpadeClause clause = SpadeClause::None;
  std::size_t first = 0;   // 0-based member indices of the witness pair
  std::size_t second = 0;
  std::optional<Integer> witness;
  std::string reason;
};

SpadeReport satisfies_spade(const PolynomialFamily& fam);

struct SpadeReduction {
  PolynomialFamily family;
  /// For input member i: (index into `family`, m_i) with q_i = p^[m_i].
  std::vector<std::pair<std::size_t, Integer>> mapping;
};

/// Drops members that are shifts of an earlier member. Requires q_i(0) = 0.
SpadeReduction reduce_to_spade(const PolynomialFamily& fam);

}  // namespace polyjoin
