#include "polyjoin/polynomial.hpp"

#include <cctype>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polyjoin {

IntPolynomial::IntPolynomial() : coeffs_{Integer(0)} {}

IntPolynomial::IntPolynomial(std::vector<Integer> binomial_coeffs) : coeffs_(std::move(binomial_coeffs)) {
  canonicalize();
}

void IntPolynomial::canonicalize() {
  while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0);
}

IntPolynomial IntPolynomial::constant(const Integer& c) { return IntPolynomial({c}); }

IntPolynomial IntPolynomial::linear(const Integer& slope) { return IntPolynomial({Integer(0), slope}); }

IntPolynomial IntPolynomial::power(unsigned k) {
  std::vector<Rational> mono(k + 1, Rational(0));
  mono[k] = 1;
  return from_monomial(mono);
}

IntPolynomial IntPolynomial::from_monomial(const std::vector<Rational>& coeffs) {
  // c_k = (Delta^k p)(0), computed from the values p(0..D).
  const std::size_t size = coeffs.empty() ? 1 : coeffs.size();
  std::vector<Rational> values(size, Rational(0));
  for (std::size_t x = 0; x < size; ++x) {
    Rational acc = 0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * Rational(static_cast<long long>(x)) + coeffs[k];
    values[x] = acc;
  }
  std::vector<Integer> out;
  out.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    const Rational& head = values[0];
    if (boost::multiprecision::denominator(head) != 1) {
      throw std::invalid_argument("polynomial is not integer-valued");
    }
    out.push_back(boost::multiprecision::numerator(head));
    for (std::size_t x = 0; x + 1 < values.size(); ++x) values[x] = values[x + 1] - values[x];
    values.pop_back();
  }
  return IntPolynomial(std::move(out));
}

namespace {

class PolyParser {
 public:
  explicit PolyParser(std::string_view text) : text_(text) {}

  std::vector<Rational> parse() {
    std::vector<Rational> mono;
    skip();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      auto [coef, power] = term();
      if (mono.size() <= power) mono.resize(power + 1, Rational(0));
      mono[power] += coef * sign;
      skip();
    }
    return mono;
  }

 private:
  std::pair<Rational, std::size_t> term() {
    Rational coef = 1;
    bool have_coef = false;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      coef = Rational(integer());
      have_coef = true;
      skip();
      if (peek() == '/') {
        ++pos_;
        skip();
        coef /= Rational(nonzero_integer());
        skip();
      }
      if (peek() == '*') {
        ++pos_;
        skip();
      }
    }
    std::size_t power = 0;
    if (peek() == 'n') {
      ++pos_;
      power = 1;
      skip();
      if (peek() == '^') {
        ++pos_;
        skip();
        const Integer e = integer();
        if (e > 64) fail("exponent too large");
        power = static_cast<std::size_t>(e);
        skip();
      }
    } else if (!have_coef) {
      fail("expected a coefficient or 'n'");
    }
    if (peek() == '/') {
      ++pos_;
      skip();
      coef /= Rational(nonzero_integer());
    }
    return {coef, power};
  }

  Integer integer() {
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail("expected an integer");
    return Integer(std::string(text_.substr(start, pos_ - start)));
  }

  Integer nonzero_integer() {
    Integer v = integer();
    if (v == 0) fail("division by zero");
    return v;
  }

  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  bool at_end() const { return pos_ >= text_.size(); }
  void skip() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("polynomial '" + std::string(text_) + "' at column " +
                                std::to_string(pos_ + 1) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

IntPolynomial IntPolynomial::parse(std::string_view text) {
  return from_monomial(PolyParser(text).parse());
}

Integer IntPolynomial::operator()(const Integer& n) const {
  Integer acc = coeffs_[0];
  Integer binom = 1;
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    binom = binom * (n - (k - 1)) / k;
    acc += coeffs_[k] * binom;
  }
  return acc;
}

IntPolynomial IntPolynomial::translated(const Integer& j) const {
  // Vandermonde: C(n + j, k) = sum_i C(n, i) C(j, k - i).
  const std::size_t size = coeffs_.size();
  std::vector<Integer> binom_j(size);
  for (std::size_t r = 0; r < size; ++r) binom_j[r] = binomial(j, static_cast<unsigned>(r));
  std::vector<Integer> out(size, Integer(0));
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t k = i; k < size; ++k) out[i] += coeffs_[k] * binom_j[k - i];
  }
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::shift(const Integer& j) const {
  IntPolynomial t = translated(j);
  t.coeffs_[0] = 0;
  t.canonicalize();
  return t;
}

std::vector<Rational> IntPolynomial::monomial_coeffs() const {
  std::vector<Rational> out(coeffs_.size(), Rational(0));
  std::vector<Rational> basis{Rational(1)};  // monomial coefficients of C(n, k)
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    for (std::size_t i = 0; i < basis.size(); ++i) out[i] += Rational(coeffs_[k]) * basis[i];
    // C(n, k+1) = C(n, k) * (n - k) / (k + 1)
    std::vector<Rational> next(basis.size() + 1, Rational(0));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      next[i + 1] += basis[i];
      next[i] -= basis[i] * Rational(static_cast<long long>(k));
    }
    for (auto& c : next) c /= Rational(static_cast<long long>(k + 1));
    basis = std::move(next);
  }
  return out;
}

std::string IntPolynomial::to_string() const {
  const auto mono = monomial_coeffs();
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = mono.size(); k-- > 0;) {
    const Rational& c = mono[k];
    if (c == 0) continue;
    const bool neg = c < 0;
    const Rational mag = neg ? Rational(-c) : c;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    const Integer num = boost::multiprecision::numerator(mag);
    const Integer den = boost::multiprecision::denominator(mag);
    if (k == 0) {
      os << polyjoin::to_string(mag);
      continue;
    }
    if (num != 1) os << num;
    os << "n";
    if (k > 1) os << "^" << k;
    if (den != 1) os << "/" << den;
  }
  if (first) os << "0";
  return os.str();
}

IntPolynomial IntPolynomial::operator+(const IntPolynomial& o) const {
  std::vector<Integer> out(std::max(coeffs_.size(), o.coeffs_.size()), Integer(0));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) out[i] += o.coeffs_[i];
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator-(const IntPolynomial& o) const { return *this + o * Integer(-1); }

IntPolynomial IntPolynomial::operator*(const Integer& k) const {
  std::vector<Integer> out = coeffs_;
  for (auto& c : out) c *= k;
  return IntPolynomial(std::move(out));
}

PolyStepper::PolyStepper(const IntPolynomial& p, const Integer& start) {
  // (Delta^k p)(n) = sum_{i >= k} c_i C(n, i - k).
  const auto& c = p.coeffs();
  std::vector<Integer> binom(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) binom[r] = binomial(start, static_cast<unsigned>(r));
  diffs_.assign(c.size(), Integer(0));
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (std::size_t i = k; i < c.size(); ++i) diffs_[k] += c[i] * binom[i - k];
  }
}

std::uint64_t period_mod(const IntPolynomial& p, std::uint64_t m, std::optional<std::uint64_t> cap) {
  if (m == 0) throw std::invalid_argument("period_mod: modulus must be positive");
  if (m == 1) return 1;
  // State: the finite-difference table (Delta^k p)(n) mod m; its period
  // equals the period of p(n) mod m since every entry is a function of
  // p(n), ..., p(n + k).
  std::vector<std::uint64_t> state;
  for (const auto& c : p.coeffs()) state.push_back(mod_u64(c, m));
  const std::vector<std::uint64_t> initial = state;

  std::uint64_t limit = cap.value_or(0);
  if (!cap) {
    // m * D!, saturated.
    constexpr std::uint64_t kHardCap = 1'000'000'000ULL;
    limit = m;
    for (int k = 2; k <= p.degree() && limit < kHardCap; ++k) limit *= static_cast<std::uint64_t>(k);
    limit = std::min(limit, kHardCap);
  }
  const std::size_t size = state.size();
  for (std::uint64_t step = 1; step <= limit; ++step) {
    for (std::size_t k = 0; k + 1 < size; ++k) {
      const std::uint64_t v = state[k] + state[k + 1];
      state[k] = (v >= m || v < state[k]) ? v - m : v;
    }
    if (state == initial) return step;
  }
  throw std::runtime_error("period_mod: period exceeds cap " + std::to_string(limit));
}

bool essentially_distinct(const IntPolynomial& p, const IntPolynomial& q) {
  return !(p - q).is_constant();
}

std::optional<Integer> shift_equivalent(const IntPolynomial& p, const IntPolynomial& q) {
  if (p.is_constant() || q.is_constant()) {
    throw std::invalid_argument("shift_equivalent: constant polynomial");
  }
  if (p.degree() != q.degree() || p.leading() != q.leading()) return std::nullopt;
  const int d = p.degree();
  if (d == 1) return Integer(0);
  // Coefficient of C(u, D-1) in p(u + t) is c_{D-1} + c_D t.
  const Integer diff = q.coeffs()[d - 1] - p.coeffs()[d - 1];
  if (diff % p.leading() != 0) return std::nullopt;
  const Integer t = diff / p.leading();
  if (essentially_distinct(p.translated(t), q)) return std::nullopt;
  return t;
}

PolynomialFamily::PolynomialFamily(std::vector<IntPolynomial> members) : members_(std::move(members)) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].is_constant()) {
      throw std::invalid_argument("polynomial family member " + std::to_string(i + 1) + " is constant");
    }
  }
}

std::vector<std::size_t> PolynomialFamily::linear_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < members_.size(); ++i)
    if (members_[i].is_linear()) out.push_back(i);
  return out;
}

std::vector<std::size_t> PolynomialFamily::nonlinear_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < members_.size(); ++i)
    if (!members_[i].is_linear()) out.push_back(i);
  return out;
}

SpadeReport satisfies_spade(const PolynomialFamily& fam) {
  SpadeReport r;
  auto fail = [&](SpadeClause c, std::size_t a, std::size_t b, std::string why) {
    r.ok = false;
    r.clause = c;
    r.first = a;
    r.second = b;
    r.reason = std::move(why);
    return r;
  };
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (fam[i].coeffs()[0] != 0) {
      return fail(SpadeClause::ZeroConstant, i, i,
                  "p(0) != 0 for member " + std::to_string(i + 1) + " (" + fam[i].to_string() + ")");
    }
  }
  const auto lin = fam.linear_indices();
  for (std::size_t a = 0; a < lin.size(); ++a) {
    for (std::size_t b = a + 1; b < lin.size(); ++b) {
      if (fam[lin[a]].leading() == fam[lin[b]].leading()) {
        return fail(SpadeClause::LinearSlopes, lin[a], lin[b],
                    "linear members " + std::to_string(lin[a] + 1) + " and " + std::to_string(lin[b] + 1) +
                        " share slope " + fam[lin[a]].leading().str());
      }
    }
  }
  const auto nonlin = fam.nonlinear_indices();
  for (std::size_t i : nonlin) {
    if (fam[i].degree() < 2) {
      return fail(SpadeClause::NonlinearDegree, i, i, "member " + std::to_string(i + 1) + " has degree < 2");
    }
  }
  for (std::size_t a = 0; a < nonlin.size(); ++a) {
    for (std::size_t b = a + 1; b < nonlin.size(); ++b) {
      if (auto t = shift_equivalent(fam[nonlin[a]], fam[nonlin[b]])) {
        fail(SpadeClause::ShiftEquivalent, nonlin[a], nonlin[b],
             "member " + std::to_string(nonlin[b] + 1) + " is a shift of member " + std::to_string(nonlin[a] + 1) +
                 " with t = " + t->str());
        r.witness = *t;
        return r;
      }
    }
  }
  return r;
}

SpadeReduction reduce_to_spade(const PolynomialFamily& fam) {
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (fam[i].coeffs()[0] != 0) {
      throw std::invalid_argument("reduce_to_spade: member " + std::to_string(i + 1) + " has nonzero constant term");
    }
  }
  std::vector<IntPolynomial> kept;
  SpadeReduction out;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    bool mapped = false;
    for (std::size_t r = 0; r < kept.size() && !mapped; ++r) {
      if (auto t = shift_equivalent(kept[r], fam[i])) {
        // kept(u + t) - q(u) is constant and q(0) = 0, so q = kept^[t].
        out.mapping.emplace_back(r, *t);
        mapped = true;
      }
    }
    if (!mapped) {
      out.mapping.emplace_back(kept.size(), Integer(0));
      kept.push_back(fam[i]);
    }
  }
  out.family = PolynomialFamily(std::move(kept));
  return out;
}

}  // namespace polyjoin
