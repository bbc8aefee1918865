#include <gtest/gtest.h>

#include <random>

#include "polyjoin/polynomial.hpp"

using namespace polyjoin;

namespace {

IntPolynomial P(const char* text) { return IntPolynomial::parse(text); }

// Direct monomial evaluation, independent of the binomial basis.
Rational horner(const std::vector<Rational>& mono, const Integer& n) {
  Rational v = 0;
  for (auto it = mono.rbegin(); it != mono.rend(); ++it) v = v * Rational(n) + *it;
  return v;
}

IntPolynomial random_poly(std::mt19937_64& rng, int max_degree = 4) {
  std::uniform_int_distribution<int> deg(1, max_degree);
  std::uniform_int_distribution<int> coef(-9, 9);
  std::vector<Integer> c(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& x : c) x = coef(rng);
  if (c.back() == 0) c.back() = 1;
  return IntPolynomial(c);
}

}  // namespace

TEST(Polynomial, EvalExamples) {
  EXPECT_EQ(IntPolynomial({0, 0, 1})(4), 6);
  EXPECT_EQ(IntPolynomial({0, 1, 2}), IntPolynomial::power(2));
  EXPECT_EQ(IntPolynomial::power(2)(1000000), Integer(1000000000000LL));
  EXPECT_EQ(IntPolynomial::power(3)(-5), -125);
}

TEST(Polynomial, ParseForms) {
  EXPECT_EQ(P("n^2 + 6n"), IntPolynomial::power(2) + IntPolynomial::linear(6));
  EXPECT_EQ(P("n^2/2 - n/2"), IntPolynomial({0, 0, 1}));
  EXPECT_EQ(P("-3*n^3 + 1").at(2), -23);
  EXPECT_EQ(P("n").to_string(), "n");
  EXPECT_EQ(P("n^2 + 6n").to_string(), "n^2 + 6n");
  EXPECT_THROW(P("n^2/3"), std::exception);
  EXPECT_THROW(P("n +"), std::exception);
}

TEST(Polynomial, BasisRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coef(-20, 20);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rational> mono(static_cast<std::size_t>(trial % 5) + 1);
    for (auto& c : mono) c = coef(rng);
    const IntPolynomial p = IntPolynomial::from_monomial(mono);
    for (int n = -20; n <= 20; ++n) ASSERT_EQ(Rational(p.at(n)), horner(mono, n));
  }
}

TEST(Polynomial, ShiftExamples) {
  for (int k : {-4, 1, 3, 7}) {
    EXPECT_EQ(IntPolynomial::power(2).shift(k), IntPolynomial::power(2) + IntPolynomial::linear(2 * k));
  }
  std::mt19937_64 rng(2);
  const IntPolynomial p = random_poly(rng);
  EXPECT_EQ(p.shift(0), p - IntPolynomial::constant(p.at(0)));
}

TEST(Polynomial, ShiftComposition) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> j(-50, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    const IntPolynomial p = random_poly(rng);
    const int a = j(rng);
    const int b = j(rng);
    ASSERT_EQ(p.shift(a).shift(b), p.shift(a + b));
    ASSERT_EQ(p.shift(a).at(0), 0);
  }
}

TEST(Polynomial, StepperMatchesEval) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const IntPolynomial p = random_poly(rng, 5);
    PolyStepper s(p, -37);
    for (int n = -37; n < 40; ++n, s.advance()) ASSERT_EQ(s.value(), p.at(n));
  }
}

TEST(Polynomial, EssentiallyDistinct) {
  EXPECT_FALSE(essentially_distinct(P("n^2"), P("n^2 + 5")));
  EXPECT_TRUE(essentially_distinct(P("n^2"), P("n^2 + 2n")));
  EXPECT_FALSE(essentially_distinct(P("n^3 - n"), P("n^3 - n")));
}

TEST(Polynomial, ShiftEquivalentExamples) {
  EXPECT_EQ(shift_equivalent(P("n^2"), P("n^2 + 2n")), Integer(1));
  EXPECT_EQ(shift_equivalent(P("n^2"), P("n^2 + 6n")), Integer(3));
  EXPECT_FALSE(shift_equivalent(P("n^2"), P("n^3")));
  EXPECT_FALSE(shift_equivalent(P("n^2"), P("n^2 + 3n")));
  EXPECT_FALSE(shift_equivalent(P("n^2"), P("2n^2")));
  EXPECT_EQ(shift_equivalent(P("3n"), P("3n + 4")), Integer(0));
  EXPECT_FALSE(shift_equivalent(P("3n"), P("2n")));
  EXPECT_THROW(shift_equivalent(P("5"), P("n")), std::exception);
}

TEST(Polynomial, ShiftEquivalenceIsAnEquivalence) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> t(-30, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    IntPolynomial p = random_poly(rng);
    if (p.degree() < 2) p = p + IntPolynomial::power(2);
    const int a = t(rng);
    const int b = t(rng);
    const IntPolynomial q = p.translated(a) + IntPolynomial::constant(t(rng));
    const IntPolynomial r = q.translated(b) + IntPolynomial::constant(t(rng));
    ASSERT_EQ(shift_equivalent(p, p), Integer(0));
    ASSERT_EQ(shift_equivalent(p, q), Integer(a));
    ASSERT_EQ(shift_equivalent(q, p), Integer(-a));
    ASSERT_EQ(shift_equivalent(q, r), Integer(b));
    ASSERT_EQ(shift_equivalent(p, r), Integer(a + b));
  }
}

TEST(Polynomial, SpadeExamples) {
  EXPECT_TRUE(satisfies_spade(PolynomialFamily({P("n"), P("2n"), P("n^2"), P("n^3")})).ok);

  const SpadeReport r = satisfies_spade(PolynomialFamily({P("n^2"), P("n^2 + 6n"), P("n^2 + 10n")}));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.clause, SpadeClause::ShiftEquivalent);
  EXPECT_EQ(r.first, 0u);
  EXPECT_EQ(r.second, 1u);
  EXPECT_EQ(r.witness, Integer(3));

  const SpadeReport c = satisfies_spade(PolynomialFamily({P("n^2 + 1")}));
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.clause, SpadeClause::ZeroConstant);

  EXPECT_EQ(satisfies_spade(PolynomialFamily({P("n"), P("n")})).clause, SpadeClause::LinearSlopes);
}

TEST(Polynomial, ReduceExamples) {
  const SpadeReduction a = reduce_to_spade(PolynomialFamily({P("n^2"), P("n^2 + 6n"), P("n^2 + 10n")}));
  ASSERT_EQ(a.family.size(), 1u);
  EXPECT_EQ(a.family[0], P("n^2"));
  ASSERT_EQ(a.mapping.size(), 3u);
  EXPECT_EQ(a.mapping[1].second, 3);
  EXPECT_EQ(a.mapping[2].second, 5);

  const PolynomialFamily fixed({P("n"), P("n^2"), P("n^3 + n")});
  const SpadeReduction b = reduce_to_spade(fixed);
  EXPECT_EQ(b.family.members(), fixed.members());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(b.mapping[i].first, i);
    EXPECT_EQ(b.mapping[i].second, 0);
  }

  const SpadeReduction c = reduce_to_spade(PolynomialFamily({P("n"), P("n^2"), P("n^2 + 2n")}));
  ASSERT_EQ(c.family.size(), 2u);
  EXPECT_EQ(c.mapping[2], (std::pair<std::size_t, Integer>{1, 1}));
}

TEST(Polynomial, ReductionProperties) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> t(-6, 6);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<IntPolynomial> bases{IntPolynomial::power(2), P("n^3 - n^2"), P("2n^2 + n")};
    std::vector<IntPolynomial> members;
    for (int k = 0; k < 4; ++k) members.push_back(bases[static_cast<std::size_t>(pick(rng))].shift(t(rng)));
    const PolynomialFamily fam(members);
    const SpadeReduction red = reduce_to_spade(fam);
    ASSERT_TRUE(satisfies_spade(red.family).ok);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto& [idx, m] = red.mapping[i];
      for (int n = -10; n <= 10; ++n) ASSERT_EQ(fam[i].at(n), red.family[idx].shift(m).at(n));
    }
  }
}

TEST(Polynomial, PeriodExamples) {
  EXPECT_EQ(period_mod(P("n"), 5), 5u);
  EXPECT_EQ(period_mod(P("n^2"), 5), 5u);
  EXPECT_EQ(period_mod(IntPolynomial({0, 0, 1}), 2), 4u);
  EXPECT_EQ(period_mod(P("n^2"), 8), 4u);
  EXPECT_EQ(period_mod(P("3n"), 1), 1u);
}

TEST(Polynomial, PeriodIsAPeriodAndMinimal) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const IntPolynomial p = random_poly(rng);
    const std::uint64_t m = 2 + trial % 23;
    const std::uint64_t per = period_mod(p, m);
    for (std::uint64_t n = 0; n < 3 * per; ++n) {
      ASSERT_EQ(mod_u64(p(Integer(n + per)), m), mod_u64(p(Integer(n)), m));
    }
    for (std::uint64_t q = 1; q < per; ++q) {
      if (per % q != 0) continue;
      bool periodic = true;
      for (std::uint64_t n = 0; n < per && periodic; ++n) periodic = mod_u64(p(Integer(n + q)), m) == mod_u64(p(Integer(n)), m);
      ASSERT_FALSE(periodic) << "smaller period " << q;
    }
  }
}

TEST(Polynomial, FamilyRejectsConstants) {
  EXPECT_THROW(PolynomialFamily({P("n"), P("4")}), std::exception);
  const PolynomialFamily fam({P("n"), P("n^2"), P("2n")});
  EXPECT_EQ(fam.linear_indices(), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(fam.nonlinear_indices(), (std::vector<std::size_t>{1}));
}
