#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polyjoin/averaging.hpp"
#include "polyjoin/joinings.hpp"

using namespace polyjoin;

namespace {

Term term(IntPolynomial p, Observable f, Action a = Action::Main) { return Term{a, std::move(p), std::move(f)}; }

IntPolynomial P(const char* s) { return IntPolynomial::parse(s); }

}  // namespace

TEST(Averaging, ConstantsAverageToOne) {
  const SystemSpec sys = SystemSpec::skew();
  const std::vector<Term> terms{term(P("n"), Observable::constant(1)), term(P("n^2"), Observable::constant(1))};
  EXPECT_EQ(finite_multiple_average(sys, sample(sys, 1), terms, 12345), 1.0);
  const Estimate e = limit_multiple_average(sys, sample(sys, 1), terms, NSchedule{100, 2, 5});
  EXPECT_EQ(e.value, 1.0);
  for (double r : e.residuals) EXPECT_EQ(r, 0.0);
  EXPECT_TRUE(e.converged);
}

TEST(Averaging, CyclicSquaresHitZeroOnceInFive) {
  const SystemSpec sys = SystemSpec::cyclic(5);
  const std::vector<Term> t{term(P("n^2"), Observable::indicator({0}))};
  for (std::uint64_t k : {1u, 7u, 200u}) EXPECT_EQ(finite_multiple_average(sys, CyclicPoint{0}, t, 5 * k), 0.2);
}

TEST(Averaging, LinearTermIsBirkhoff) {
  const SystemSpec sys = SystemSpec::skew();
  const Observable f = Observable::cosine(1, 1.0, 1);
  const Point x = sample(sys, 4);
  double direct = 0.0;
  Point y = x;
  for (int n = 0; n < 3000; ++n) {
    direct += observe(sys, f, y);
    y = iterate(sys, Action::Main, y, 1);
  }
  EXPECT_NEAR(finite_multiple_average(sys, x, {term(P("n"), f)}, 3000), direct / 3000, 1e-12);
}

TEST(Averaging, WeylSquares) {
  const SystemSpec sys = SystemSpec::torus();
  const Estimate e =
      limit_multiple_average(sys, sample(sys, 1), {term(P("n^2"), Observable::cosine())}, NSchedule::up_to(1000000, 7));
  EXPECT_LE(std::abs(e.value), 0.02);
  EXPECT_TRUE(e.converged);
  EXPECT_EQ(e.sizes.back(), 1000000u);
  EXPECT_EQ(e.residuals.size(), 6u);
}

TEST(Averaging, CyclicLimitEqualsExactOracle) {
  const SystemSpec sys = SystemSpec::cyclic(12, 5);
  const std::vector<Term> t{term(P("n"), Observable::indicator({0, 3, 4})),
                            term(P("n^2 + n"), Observable::indicator({1, 3, 4, 8}))};
  const Rational exact = exact_term_average(sys, t);
  const std::uint64_t period = joint_period(sys, t);
  // exact_term_average also averages over x.
  double mean = 0.0;
  for (std::uint64_t x = 0; x < 12; ++x) {
    const double v = finite_multiple_average(sys, CyclicPoint{x}, t, 4 * period);
    // Finite sums of 0/1 products are exact integers.
    const double count = v * 4 * static_cast<double>(period);
    EXPECT_EQ(count, std::round(count));
    mean += v / 12;
  }
  EXPECT_NEAR(mean, to_double(exact), 1e-15);
}

TEST(Averaging, CyclicAveragesStopMovingAfterOnePeriod) {
  const SystemSpec sys = SystemSpec::cyclic(10, 3);
  const std::vector<Term> t{term(P("n^2"), Observable::indicator({0, 1, 2})),
                            term(P("2n"), Observable::indicator({1, 4, 6, 9}))};
  const std::uint64_t period = joint_period(sys, t);
  const L2Profile p = l2_profile(sys, t, NSchedule{period, 2, 5}, 8, 3);
  for (double r : p.rms) EXPECT_EQ(r, 0.0);
}

TEST(Averaging, ProfileOfConstantsIsZero) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  const L2Profile p = l2_profile(sys, {term(P("n"), Observable::constant(3.0), Action::Rotate)}, NSchedule{64, 2, 4}, 4, 1);
  for (double r : p.rms) EXPECT_EQ(r, 0.0);
  EXPECT_EQ(p.final_values.size(), 4u);
  EXPECT_EQ(p.mean_final, 3.0);
  EXPECT_THROW(l2_profile(sys, {}, NSchedule{64, 2, 4}, 1, 1), std::invalid_argument);
}

TEST(Averaging, RotateDoubleProfileShrinks) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  const std::vector<Term> t{term(P("n"), Observable::cosine(), Action::Rotate),
                            term(P("n^2"), Observable::cosine(), Action::Double)};
  const L2Profile p = l2_profile(sys, t, NSchedule::up_to(40000, 4), 8, 9);
  EXPECT_LE(p.rms.back(), 0.05);
  EXPECT_LE(std::abs(p.mean_final), 0.05);
}

TEST(Averaging, Linearity) {
  const SystemSpec sys = SystemSpec::torus();
  const Point x = sample(sys, 8);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng);
    const double b = u(rng);
    TrigPoly g{0.0, {{1, 1.0, 0.0}}, 0};
    TrigPoly h{0.3, {{2, 1.0, 0.25}}, 0};
    TrigPoly comb{0.3 * b, {{1, a, 0.0}, {2, b, 0.25}}, 0};
    const Term other = term(P("n^2"), Observable::cosine(3));
    auto avg = [&](TrigPoly f) {
      return finite_multiple_average(sys, x, {term(P("n"), Observable::trig(f)), other}, 5000);
    };
    EXPECT_NEAR(avg(comb), a * avg(g) + b * avg(h), 1e-12);
  }
}

TEST(Averaging, ShiftAbsorption) {
  const SystemSpec sys = SystemSpec::skew();
  const Point x = sample(sys, 2);
  const IntPolynomial p = P("n^2 + 3n");
  const Observable f = Observable::cosine(1, 1.0, 1);
  constexpr std::uint64_t kN = 20000;
  for (int j : {1, 5, 40}) {
    const auto shifted = bind_terms(sys, x, {term(p.translated(j), f)});
    const auto plain = bind_terms(sys, x, {term(p, f)});
    const double a = orbit_product_sum(shifted, 0, 0, kN).value() / kN;
    const double b = orbit_product_sum(plain, j, 0, kN).value() / kN;
    EXPECT_NEAR(a, b, 1e-12);
    const double c = orbit_product_sum(plain, 0, 0, kN).value() / kN;
    EXPECT_LE(std::abs(b - c), 2.0 * j / kN);
  }
}

TEST(Averaging, IncrementalLevelsMatchScratch) {
  const SystemSpec sys = SystemSpec::torus();
  const auto factors = bind_terms(sys, sample(sys, 3), {term(P("n^2"), Observable::cosine()), term(P("n"), Observable::cosine(2))});
  const auto levels = orbit_levels(factors, {10000, 20000, 40000, 80000});
  EXPECT_NEAR(levels.back(), orbit_product_sum(factors, 0, 0, 80000).value() / 80000, std::ldexp(1.0, -40));
}

TEST(Averaging, WorkerCountDoesNotChangeBits) {
  const SystemSpec sys = SystemSpec::skew();
  const auto factors = bind_terms(sys, sample(sys, 3), {term(P("n^3"), Observable::cosine(1, 1.0, 1))});
  const auto one = orbit_levels(factors, {5000, 50000}, 0, 1);
  for (int w : {2, 5, 16}) EXPECT_EQ(orbit_levels(factors, {5000, 50000}, 0, w), one);
}

TEST(Averaging, RecurrenceExamples) {
  const SystemSpec z8 = SystemSpec::cyclic(8);
  const RecurrenceResult whole =
      recurrence_average(z8, Observable::indicator({0, 1, 2, 3, 4, 5, 6, 7}), PolynomialFamily({P("n")}), NSchedule{8, 2, 3});
  EXPECT_EQ(whole.exact, 1);

  // Brute force over one period of (n mod 8, n^2 mod 8).
  int hits = 0;
  for (int n = 0; n < 8; ++n) {
    for (int x : {0, 1}) hits += ((x + n) % 8 <= 1 && (x + n * n) % 8 <= 1) ? 1 : 0;
  }
  const RecurrenceResult r =
      recurrence_average(z8, Observable::indicator({0, 1}), PolynomialFamily({P("n"), P("n^2")}), NSchedule{8, 2, 4});
  EXPECT_EQ(r.exact, Rational(hits, 64));
  EXPECT_EQ(r.exact, Rational(3, 64));
  EXPECT_EQ(r.period, 8u);
  EXPECT_EQ(r.estimate.value, 3.0 / 64);

  const RecurrenceResult z5 = recurrence_average(SystemSpec::cyclic(5), Observable::indicator({0}),
                                                 PolynomialFamily({P("n^2")}), NSchedule{5, 2, 3});
  EXPECT_EQ(z5.exact, Rational(1, 25));

  EXPECT_THROW(recurrence_average(z8, Observable::indicator({}), PolynomialFamily({P("n")}), NSchedule{8, 2, 3}),
               std::invalid_argument);
  EXPECT_THROW(recurrence_average(SystemSpec::torus(), Observable::cosine(), PolynomialFamily({P("n")}), NSchedule{}),
               std::invalid_argument);
}

TEST(Averaging, UnitWeightReducesToPlainAverage) {
  const SystemSpec sys = SystemSpec::torus();
  const Point x = sample(sys, 6);
  const std::vector<Term> t{term(P("n^2"), Observable::cosine())};
  const NSchedule s{1000, 2, 5};
  const SystemSpec skew = SystemSpec::skew();
  const NilWeight one{skew, sample(skew, 1), Observable::constant(1.0), P("n")};
  EXPECT_EQ(weighted_average(sys, x, one, t, s).level_values, limit_multiple_average(sys, x, t, s).level_values);
}

TEST(Averaging, NilWeightedAverages) {
  const SystemSpec skew = SystemSpec::skew();
  const NilWeight w{skew, sample(skew, 2), Observable::cosine(1, 1.0, 1), P("n")};
  const SystemSpec torus = SystemSpec::torus();
  const Estimate a =
      weighted_average(torus, sample(torus, 3), w, {term(P("n"), Observable::cosine())}, NSchedule::up_to(1000000, 7));
  EXPECT_TRUE(a.converged);
  EXPECT_LE(a.residuals.back(), 0.02);

  const SystemSpec circ = SystemSpec::circle_bitstream();
  const Estimate b = weighted_average(circ, sample(circ, 4), w, {term(P("n"), Observable::cosine(), Action::Double)},
                                      NSchedule::up_to(200000, 5));
  EXPECT_LE(std::abs(b.value), 0.03);
}

TEST(Averaging, VanDerCorputExamples) {
  std::vector<double> ones(100, 1.0);
  const VdcResult a = vdc_check(ones, 10);
  EXPECT_EQ(a.lhs, 1.0);
  EXPECT_EQ(a.rhs, 1.0);

  std::vector<double> alt(10000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  const VdcResult b = vdc_check(alt, 100);
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_LE(b.lhs, b.rhs);

  EXPECT_THROW(vdc_check(ones, 100), std::invalid_argument);
  EXPECT_THROW(vdc_check(ones, 0), std::invalid_argument);
}

TEST(Averaging, VanDerCorputRandomSigns) {
  std::mt19937_64 rng(17);
  std::vector<double> z(2000);
  for (int t = 0; t < 200; ++t) {
    for (auto& v : z) v = (rng() & 1) ? 1.0 : -1.0;
    const VdcResult r = vdc_check(z, 40);
    ASSERT_LE(r.lhs, r.rhs + vdc_slack(z.size(), 40, 1.0));
  }
}
