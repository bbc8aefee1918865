#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polyjoin/joinings.hpp"

using namespace polyjoin;

namespace {

IntPolynomial P(const char* s) { return IntPolynomial::parse(s); }

Observable ind(std::vector<std::uint64_t> m) { return Observable::indicator(std::move(m)); }

// (1 / (m K)) sum_x sum_{n < K} prod_{(j,i)} f(x + a p_i(n + j)); K must be a
// common period of every p_i(n + j) mod m.
Rational brute_cylinder(std::uint64_t m, std::int64_t a, const std::vector<IntPolynomial>& fam,
                        const std::map<GridKey, std::vector<std::uint64_t>>& grid, std::uint64_t K) {
  Integer hits = 0;
  for (std::uint64_t x = 0; x < m; ++x) {
    for (std::uint64_t n = 0; n < K; ++n) {
      bool all = true;
      for (const auto& [key, members] : grid) {
        const Integer v = Integer(x) + Integer(a) * fam[key.second](Integer(n) + key.first);
        const std::uint64_t y = mod_u64(v, m);
        all = all && std::find(members.begin(), members.end(), y) != members.end();
      }
      hits += all ? 1 : 0;
    }
  }
  return Rational(hits) / Rational(Integer(m) * K);
}

CylinderSpec to_spec(int l, const std::map<GridKey, std::vector<std::uint64_t>>& grid) {
  CylinderSpec c;
  c.l = l;
  for (const auto& [k, v] : grid) c.grid.emplace(k, ind(v));
  return c;
}

std::map<GridKey, std::vector<std::uint64_t>> random_grid(std::mt19937_64& rng, std::uint64_t m, int l, std::size_t d) {
  std::map<GridKey, std::vector<std::uint64_t>> g;
  for (int j = -l; j <= l; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      if (rng() % 3 == 0) continue;
      std::vector<std::uint64_t> s;
      for (std::uint64_t r = 0; r < m; ++r) {
        if (rng() & 1) s.push_back(r);
      }
      if (s.empty()) s.push_back(rng() % m);
      g.emplace(GridKey{j, i}, s);
    }
  }
  return g;
}

const NSchedule kShort{2000, 2, 4};

}  // namespace

TEST(Joinings, AllOnesGrid) {
  const SystemSpec sys = SystemSpec::torus();
  CylinderSpec c{1, {{{0, 0}, Observable::constant(1)}, {{1, 1}, Observable::constant(1)}}, {}};
  const PolynomialFamily fam({P("n"), P("n^2")});
  EXPECT_EQ(cylinder_corr(sys, fam, c, Sampling::sampled(4, 1), kShort).value, 1.0);
  EXPECT_EQ(cylinder_corr_exact(SystemSpec::cyclic(6), fam, c), 1);
}

TEST(Joinings, ExactExamples) {
  const SystemSpec z5 = SystemSpec::cyclic(5);
  const PolynomialFamily sq({P("n^2")});
  const CylinderSpec three{1, {{{-1, 0}, ind({0})}, {{0, 0}, ind({0})}, {{1, 0}, ind({0})}}, {}};
  EXPECT_EQ(cylinder_corr_exact(z5, sq, three), 0);
  EXPECT_EQ(cylinder_corr_exact(z5, sq, CylinderSpec{0, {{{0, 0}, ind({0})}}, {}}), Rational(1, 5));
  EXPECT_THROW(cylinder_corr_exact(SystemSpec::torus(), sq, three), std::invalid_argument);
}

TEST(Joinings, ExactMatchesBruteForce) {
  std::mt19937_64 rng(21);
  const std::vector<IntPolynomial> fam{P("n"), P("n^2"), P("2n^2 + n")};
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint64_t m = 3 + rng() % 10;
    const std::int64_t a = 1 + static_cast<std::int64_t>(rng() % m);
    const int l = static_cast<int>(rng() % 3);
    const auto grid = random_grid(rng, m, l, fam.size());
    const Rational want = brute_cylinder(m, a, fam, grid, 2 * m);
    ASSERT_EQ(cylinder_corr_exact(SystemSpec::cyclic(m, a), PolynomialFamily(fam), to_spec(l, grid)), want)
        << "m = " << m << " a = " << a;
  }
}

TEST(Joinings, MarginalIsIntegral) {
  const PolynomialFamily fam({P("n"), P("n^2")});
  const SystemSpec z9 = SystemSpec::cyclic(9, 2);
  EXPECT_EQ(cylinder_corr_exact(z9, fam, CylinderSpec{1, {{{1, 1}, ind({0, 3, 4})}}, {}}), Rational(1, 3));

  const SystemSpec torus = SystemSpec::torus();
  TrigPoly f{0.3, {{1, 1.0, 0.0}}, 0};
  const Estimate e =
      cylinder_corr(torus, fam, CylinderSpec{1, {{{-1, 1}, Observable::trig(f)}}, {}}, Sampling::sampled(16, 2), kShort);
  EXPECT_LE(std::abs(e.value - 0.3), 3 * e.std_error.value_or(0) + 1e-9);
}

TEST(Joinings, MonteCarloAgreesWithOracle) {
  std::mt19937_64 rng(22);
  for (std::uint64_t m : {5u, 8u, 12u}) {
    const SystemSpec sys = SystemSpec::cyclic(m);
    const PolynomialFamily fam({P("n"), P("n^2")});
    const CylinderSpec cyl = to_spec(1, random_grid(rng, m, 1, 2));
    const Rational exact = cylinder_corr_exact(sys, fam, cyl);
    const std::uint64_t per = joint_period(sys, cylinder_terms(fam, cyl));
    // Level sizes are multiples of the period, so every level is the limit.
    const Estimate en = cylinder_corr(sys, fam, cyl, Sampling::enumerate(), NSchedule{per, 2, 3});
    for (double v : en.level_values) EXPECT_NEAR(v, to_double(exact), 1e-12);
    EXPECT_NEAR(en.value, to_double(exact), 1e-12);
  }
}

TEST(Joinings, ProductStructureUnderDoubling) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  TrigPoly half{1.0, {{1, 0.5, 0.0}}, 0};
  CylinderSpec c{1, {}, {}};
  for (int j = -1; j <= 1; ++j) c.grid.emplace(GridKey{j, 0}, Observable::trig(half));
  const Estimate e = cylinder_corr(sys, PolynomialFamily({P("n^2")}), c, Sampling::sampled(32, 1), NSchedule::up_to(32000, 4));
  ASSERT_TRUE(e.std_error);
  EXPECT_LE(std::abs(e.value - 1.0), 3 * *e.std_error);
}

TEST(Joinings, Multilinearity) {
  const SystemSpec sys = SystemSpec::skew();
  const PolynomialFamily fam({P("n"), P("n^2")});
  const Sampling s = Sampling::sampled(6, 3);
  const NSchedule sched{500, 2, 3};
  auto corr = [&](const Observable& slot) {
    CylinderSpec c{1, {{{0, 0}, Observable::cosine(1, 1.0, 1)}, {{1, 1}, slot}}, {}};
    return cylinder_corr(sys, fam, c, s, sched).value;
  };
  const double one = corr(Observable::cosine(1, 1.0, 0));
  const double three = corr(Observable::cosine(3, 1.0, 0));
  const double half = corr(Observable::constant(0.5));
  TrigPoly scaled{0, {{1, 2.0, 0.0}}, 0};
  EXPECT_NEAR(corr(Observable::trig(scaled)), 2 * one, 1e-12);
  TrigPoly sum{0.5, {{1, 1.0, 0.0}, {3, 1.0, 0.0}}, 0};
  EXPECT_NEAR(corr(Observable::trig(sum)), one + three + half, 1e-12);
}

TEST(Joinings, ShiftAndTransformationInvariance) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t m = 4 + rng() % 8;
    const SystemSpec sys = SystemSpec::cyclic(m, 1);
    const PolynomialFamily fam({P("n"), P("n^2")});
    const auto grid = random_grid(rng, m, 1, 2);
    const Rational base = cylinder_corr_exact(sys, fam, to_spec(1, grid));
    std::map<GridKey, std::vector<std::uint64_t>> moved;
    for (const auto& [k, v] : grid) moved.emplace(GridKey{k.first + 1, k.second}, v);
    EXPECT_EQ(cylinder_corr_exact(sys, fam, to_spec(2, moved)), base);
    CylinderSpec composed = to_spec(1, grid);
    for (auto& [k, f] : composed.grid) f = precompose(sys, f, 1);
    EXPECT_EQ(cylinder_corr_exact(sys, fam, composed), base);
  }
}

TEST(Joinings, SpadeIsEnforcedUnlessWaived) {
  const SystemSpec sys = SystemSpec::cyclic(7);
  const PolynomialFamily bad({P("n^2"), P("n^2 + 2n")});
  const CylinderSpec c{0, {{{0, 0}, ind({0, 1})}}, {}};
  EXPECT_THROW(cylinder_corr(sys, bad, c, Sampling::enumerate(), NSchedule{14, 2, 2}), std::invalid_argument);
  EXPECT_NO_THROW(cylinder_corr(sys, bad, c, Sampling::enumerate(), NSchedule{14, 2, 2}, true));
}

TEST(Joinings, TildeSpecialCases) {
  const SystemSpec z6 = SystemSpec::cyclic(6);
  const PolynomialFamily fam({P("n"), P("n^2")});
  // s = 0: the split cylinder is an ordinary cylinder.
  const SplitCylinderSpec none{{}, 1, {{{0, 0}, ind({0, 1})}, {{1, 1}, ind({2, 3, 5})}}};
  const CylinderSpec same{1, none.grid, {}};
  EXPECT_EQ(tilde_cylinder_corr_exact(z6, fam, none), cylinder_corr_exact(z6, fam, same));
  const Estimate a = tilde_cylinder_corr(z6, fam, none, Sampling::enumerate(), NSchedule{12, 2, 3});
  const Estimate b = cylinder_corr(z6, fam, same, Sampling::enumerate(), NSchedule{12, 2, 3});
  EXPECT_EQ(a.level_values, b.level_values);

  // s = d, l = 0: the Furstenberg joining.
  const PolynomialFamily lin({P("n"), P("2n")});
  const SplitCylinderSpec all{{ind({0, 1}), ind({0, 3})}, 0, {}};
  const Rational fj = fj_corr_exact(z6, {1, 2}, {ShiftedProduct::single(ind({0, 1})), ShiftedProduct::single(ind({0, 3}))});
  EXPECT_EQ(tilde_cylinder_corr_exact(z6, lin, all), fj);

  // Mixed family: brute force over x in Z/6 and a full period in n.
  const SplitCylinderSpec mixed{{ind({0, 2})}, 1, {{{-1, 1}, ind({1, 4})}, {{1, 1}, ind({0, 1, 3})}}};
  Integer hits = 0;
  for (int x = 0; x < 6; ++x) {
    for (int n = 0; n < 12; ++n) {
      const bool lin_ok = (x + n) % 6 == 0 || (x + n) % 6 == 2;
      const int u = (x + (n - 1) * (n - 1)) % 6;
      const int v = (x + (n + 1) * (n + 1)) % 6;
      hits += lin_ok && (u == 1 || u == 4) && (v == 0 || v == 1 || v == 3) ? 1 : 0;
    }
  }
  EXPECT_EQ(tilde_cylinder_corr_exact(z6, fam, mixed), Rational(hits) / 72);
}

TEST(Joinings, FurstenbergJoiningExamples) {
  const SystemSpec z4 = SystemSpec::cyclic(4);
  EXPECT_EQ(fj_corr_exact(z4, {1, 2}, {ShiftedProduct::single(ind({0})), ShiftedProduct::single(ind({0}))}),
            Rational(1, 16));
  EXPECT_EQ(fj_corr_exact(z4, {1, 3}, {ShiftedProduct::single(Observable::constant(1)), ShiftedProduct::single(Observable::constant(1))}), 1);

  const SystemSpec torus = SystemSpec::torus();
  TrigPoly f{0.25, {{1, 1.0, 0.0}}, 0};
  const Estimate e = fj_corr(torus, {1}, {ShiftedProduct::single(Observable::trig(f))}, Sampling::sampled(8, 1), kShort);
  EXPECT_NEAR(e.value, 0.25, 0.02);
}

TEST(Joinings, IdentityCase) {
  std::mt19937_64 rng(24);
  const SystemSpec z7 = SystemSpec::cyclic(7);
  for (int trial = 0; trial < 20; ++trial) {
    const VerifyReport r = verify_identity_case(z7, to_spec(2, random_grid(rng, 7, 2, 1)), Sampling::enumerate());
    ASSERT_TRUE(r.exact);
    EXPECT_EQ(*r.lhs_exact, *r.rhs_exact);
    EXPECT_EQ(r.residual, 0.0);
    EXPECT_TRUE(r.pass);
  }
  const VerifyReport ones = verify_identity_case(z7, CylinderSpec{1, {{{0, 0}, Observable::constant(1)}}, {}});
  EXPECT_EQ(ones.residual, 0.0);

  const SystemSpec torus = SystemSpec::torus();
  TrigPoly f{0.5, {{1, 1.0, 0.0}}, 0};
  const CylinderSpec trig{1, {{{-1, 0}, Observable::trig(f)}, {{1, 0}, Observable::cosine()}}, {}};
  const VerifyReport mc = verify_identity_case(torus, trig, Sampling::sampled(32, 5), kShort);
  ASSERT_TRUE(mc.std_error);
  EXPECT_LE(mc.residual, 3 * *mc.std_error + 1e-9);
}

TEST(Joinings, LinearCase) {
  std::mt19937_64 rng(25);
  const SystemSpec z12 = SystemSpec::cyclic(12);
  for (int trial = 0; trial < 20; ++trial) {
    const VerifyReport r =
        verify_linear_case(z12, {1, 2}, to_spec(1, random_grid(rng, 12, 1, 2)), Sampling::enumerate());
    ASSERT_TRUE(r.exact);
    EXPECT_EQ(*r.lhs_exact, *r.rhs_exact);
  }
  const SystemSpec torus = SystemSpec::torus();
  TrigPoly f{0.5, {{1, 1.0, 0.0}}, 0};
  const CylinderSpec c{1, {{{0, 0}, Observable::trig(f)}, {{1, 1}, Observable::trig(f)}}, {}};
  const VerifyReport mc = verify_linear_case(torus, {1, 3}, c, Sampling::sampled(32, 6), kShort);
  EXPECT_TRUE(mc.pass) << mc.residual;
  const VerifyReport ones = verify_linear_case(torus, {1, 3}, CylinderSpec{}, Sampling::sampled(4, 6), kShort);
  EXPECT_EQ(ones.residual, 0.0);
}

TEST(Joinings, WeakMixingProducts) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  const NSchedule sched = NSchedule::up_to(32000, 4);
  const Sampling s = Sampling::sampled(16, 7);
  const PolynomialFamily sq({P("n^2")});
  EXPECT_EQ(verify_wm_product(sys, sq, CylinderSpec{1, {}, {}}, s, sched).residual, 0.0);

  CylinderSpec cosines{1, {}, {}};
  for (int j = -1; j <= 1; ++j) cosines.grid.emplace(GridKey{j, 0}, Observable::cosine());
  const VerifyReport a = verify_wm_product(sys, sq, cosines, s, sched);
  EXPECT_TRUE(a.pass);
  EXPECT_LE(a.residual, 0.03);

  // Rotation on the linear member, doubling on the square.
  TrigPoly half{1.0, {{1, 0.5, 0.0}}, 0};
  const CylinderSpec mixed{1,
                           {{{0, 0}, Observable::trig(half)},
                            {{1, 0}, Observable::trig(half)},
                            {{-1, 1}, Observable::trig(half)},
                            {{1, 1}, Observable::cosine()}},
                           {Action::Rotate, Action::Double}};
  const VerifyReport b = verify_wm_product(sys, PolynomialFamily({P("n"), P("n^2")}), mixed, s, sched);
  EXPECT_TRUE(b.pass) << b.lhs << " vs " << b.rhs;

  EXPECT_THROW(verify_wm_product(SystemSpec::torus(), sq, cosines, s, sched), std::invalid_argument);
}

TEST(Joinings, ComponentsDisintegrateTheJoining) {
  const SystemSpec sys = SystemSpec::skew();
  const PolynomialFamily fam({P("n^2")});
  TrigPoly f{0.5, {{1, 1.0, 0.0}}, 1};
  const CylinderSpec c{1, {{{0, 0}, Observable::trig(f)}, {{1, 0}, Observable::trig(f)}}, {}};
  const Sampling s = Sampling::sampled(32, 8);
  const NSchedule sched{1000, 2, 4};
  const Estimate joint = cylinder_corr(sys, fam, c, s, sched);
  double mean = 0;
  for (const auto& x : sample_points(sys, s)) mean += component_corr(sys, fam, c, x, sched).value / 32;
  EXPECT_NEAR(mean, joint.value, 1e-12);

  EXPECT_EQ(component_corr(sys, fam, CylinderSpec{1, {}, {}}, sample(sys, 1), sched).value, 1.0);
}

TEST(Joinings, CyclicComponents) {
  const SystemSpec z7 = SystemSpec::cyclic(7, 3);
  // One slope: x + 3n runs over all of Z/7, so every component is the limit.
  const PolynomialFamily one({P("n")});
  const CylinderSpec c1{1, {{{-1, 0}, ind({0, 1, 5})}, {{1, 0}, ind({2, 3, 5})}}, {}};
  const double e1 = to_double(cylinder_corr_exact(z7, one, c1));
  for (std::uint64_t x = 0; x < 7; ++x) {
    EXPECT_NEAR(component_corr(z7, one, c1, CyclicPoint{x}, NSchedule{70, 2, 3}).value, e1, 1e-15);
  }
  // Two slopes: components depend on x, their mean is the limit.
  const PolynomialFamily two({P("n"), P("2n")});
  const CylinderSpec c2{1, {{{0, 0}, ind({0, 1, 5})}, {{1, 1}, ind({2, 3})}}, {}};
  double mean = 0;
  for (std::uint64_t x = 0; x < 7; ++x) mean += component_corr(z7, two, c2, CyclicPoint{x}, NSchedule{70, 2, 3}).value / 7;
  EXPECT_NEAR(mean, to_double(cylinder_corr_exact(z7, two, c2)), 1e-15);
}

TEST(Joinings, ProductComponents) {
  const ProductSystem ps{SystemSpec::skew(), SystemSpec::bernoulli()};
  const ProductPoint x{sample(ps.nil, 1), sample(ps.shift, 2)};
  const IntPolynomial p = P("n^2");
  const NSchedule sched = NSchedule::up_to(100000, 6);
  TrigPoly h{1.0, {{1, 0.5, 0.0}}, 1};

  const auto trivial = verify_product_components(ps, p, 1, Observable::trig(h), Observable::constant(1.0), x, sched);
  EXPECT_EQ(trivial.residual, 0.0);

  const Observable g = Observable::bitword(1, {0.5, 1.5});
  const auto shift_only = verify_product_components(ps, p, 1, Observable::constant(1.0), g, x, sched);
  EXPECT_NEAR(shift_only.joint.value, 1.0, 0.03);

  const auto full = verify_product_components(ps, p, 1, Observable::trig(h), g, x, sched);
  EXPECT_LE(full.residual, 0.05);
  EXPECT_TRUE(full.pass);
}

TEST(Joinings, OracleRefusesHugeWork) {
  const CylinderSpec c{0, {{{0, 0}, ind({0})}}, {}};
  EXPECT_EQ(cylinder_corr_exact(SystemSpec::cyclic(1000), PolynomialFamily({P("n")}), c), Rational(1, 1000));
  // Period 10^6 + 3 is under the period cap but period * m is not.
  EXPECT_THROW(cylinder_corr_exact(SystemSpec::cyclic(1000003), PolynomialFamily({P("n")}), c), std::invalid_argument);
  EXPECT_THROW(cylinder_corr_exact(SystemSpec::cyclic(9999991), PolynomialFamily({P("n^2")}), c), std::invalid_argument);
  EXPECT_THROW(fj_corr_exact(SystemSpec::cyclic(1000003), {1}, {ShiftedProduct::single(ind({0}))}), std::invalid_argument);
}
