#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "polyjoin/errors.hpp"
#include "polyjoin/sequences.hpp"

using namespace polyjoin;

namespace {

SequenceSource doubling_squares(const Observable& f, std::uint64_t seed = 3) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  return SequenceSource(OrbitSequence{sys, Action::Double, sample(sys, seed), IntPolynomial::parse("n^2"), f});
}

SequenceSource cyclic_orbit(std::uint64_t m, std::uint64_t x, std::vector<std::uint64_t> set) {
  const SystemSpec sys = SystemSpec::cyclic(m);
  return SequenceSource(
      OrbitSequence{sys, Action::Main, CyclicPoint{x}, IntPolynomial::linear(1), Observable::indicator(std::move(set))});
}

}  // namespace

TEST(Sequences, ConstantOne) {
  const auto z = SequenceSource::constant(1.0, 100000);
  const Estimate e = seq_corr(z, {0, 3, 7}, NSchedule{1000, 2, 4});
  EXPECT_EQ(e.value, 1.0);
  EXPECT_TRUE(e.converged);
}

TEST(Sequences, ExplicitValuesAndRange) {
  const SequenceSource z(ExplicitSequence{{0.5, -0.25, 1.0}, -1.0, 1.0});
  EXPECT_EQ(z.length(), 3u);
  EXPECT_EQ(z.values(1, 2), (std::vector<double>{-0.25, 1.0}));
  EXPECT_THROW(z.values(2, 2), std::out_of_range);
  EXPECT_THROW(SequenceSource(ExplicitSequence{{2.0}, -1.0, 1.0}), std::invalid_argument);
  EXPECT_EQ(z.bound(), 1.0);
}

TEST(Sequences, OrbitValuesMatchDirectObservation) {
  const auto z = cyclic_orbit(5, 2, {0, 1});
  const auto v = z.values(0, 10);
  for (std::uint64_t n = 0; n < 10; ++n) EXPECT_EQ(v[n], ((2 + n) % 5 <= 1) ? 1.0 : 0.0);
}

TEST(Sequences, SingleShiftIsPlainMean) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> vals(8000);
  for (auto& v : vals) v = u(rng);
  const SequenceSource z(ExplicitSequence{vals, -1, 1});
  const Estimate e = seq_corr(z, {0}, NSchedule{1000, 2, 4}, 1.0);
  double mean = 0;
  for (double v : vals) mean += v;
  EXPECT_NEAR(e.value, mean / 8000, 1e-12);
}

TEST(Sequences, ShiftPermutationInvariance) {
  const auto z = cyclic_orbit(7, 1, {0, 2, 3});
  const NSchedule s{700, 2, 3};
  const double a = seq_corr(z, {0, 1, 4}, s).value;
  EXPECT_EQ(seq_corr(z, {4, 0, 1}, s).value, a);
  EXPECT_EQ(seq_corr(z, {1, 4, 0}, s).value, a);
  // Brute force over one period: |{x : x, x+1, x+4 in S}| / 7.
  int hits = 0;
  for (int x = 0; x < 7; ++x) {
    auto in = [](int r) { r %= 7; return r == 0 || r == 2 || r == 3; };
    hits += in(x) && in(x + 1) && in(x + 4);
  }
  EXPECT_NEAR(a, hits / 7.0, 1e-12);
}

TEST(Sequences, DoublingSquaresCorrelations) {
  const auto z = doubling_squares(Observable::bitword(1, {0.0, 1.0}));
  const NSchedule s = NSchedule::up_to(64000, 4);
  EXPECT_NEAR(seq_corr(z, {0, 0}, s).value, 0.5, 0.03);
  const auto c = doubling_squares(Observable::cosine());
  EXPECT_NEAR(seq_corr(c, {0, 1}, s).value, 0.0, 0.03);
}

TEST(Sequences, AdmitsCorrelations) {
  const NSchedule s{1000, 2, 4};
  for (const auto& c : admits_correlations(SequenceSource::constant(0.5, 10000), {{0}, {0, 1}}, s)) {
    EXPECT_TRUE(c.pass);
  }
  for (const auto& c : admits_correlations(cyclic_orbit(8, 0, {1, 5}), {{0}, {0, 2}, {0, 1, 3}}, NSchedule{800, 2, 4})) {
    EXPECT_TRUE(c.pass);
  }
  // Blocks of +1 and -1 with doubling lengths: the running mean oscillates.
  std::vector<double> v;
  double sign = 1;
  for (std::size_t len = 1; v.size() < 300000; len *= 2, sign = -sign) v.insert(v.end(), len, sign);
  v.resize(256000);
  const auto bad = admits_correlations(SequenceSource(ExplicitSequence{v, -1, 1}), {{0}}, NSchedule{2000, 2, 8});
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_FALSE(bad[0].pass);
}

TEST(Sequences, BinOf) {
  EXPECT_EQ(bin_of(-1.0, -1, 1, 4), 0);
  EXPECT_EQ(bin_of(1.0, -1, 1, 4), 3);
  EXPECT_EQ(bin_of(0.0, -1, 1, 4), 2);
  EXPECT_EQ(bin_of(-0.5 - 1e-12, -1, 1, 4), 0);
}

TEST(Sequences, ConstantCylinderIsOneCell) {
  const auto m = generic_cylinder(SequenceSource::constant(0.3, 5000), 3, 4, 4000);
  std::size_t nonzero = 0;
  for (std::size_t c = 0; c < m.counts.size(); ++c) {
    if (m.counts[c] == 0) continue;
    ++nonzero;
    EXPECT_EQ(m.frequency(c), 1.0);
  }
  EXPECT_EQ(nonzero, 1u);
}

TEST(Sequences, MarginalMatchesHistogram) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(5000);
  for (auto& x : v) x = u(rng);
  const SequenceSource z(ExplicitSequence{v, 0, 1});
  const auto m = generic_cylinder(z, 2, 5, 4000, 7);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> hist(5, 0.0);
    for (std::uint64_t n = 0; n < 4000; ++n) hist[bin_of(v[7 + n + c], 0, 1, 5)] += 1.0 / 4000;
    const auto mar = m.marginal(c);
    for (int b = 0; b < 5; ++b) EXPECT_NEAR(mar[b], hist[b], 1e-12);
  }
  EXPECT_THROW(generic_cylinder(z, 2, 5, 4999, 7), std::out_of_range);
  EXPECT_THROW(generic_cylinder(z, 7, 10, 100), BudgetExceeded);
}

TEST(Sequences, DoublingCylinderIsNearlyProduct) {
  const auto z = doubling_squares(Observable::cosine());
  const auto m = generic_cylinder(z, 2, 3, 64000);
  EXPECT_LE(m.product_residual(), 0.05);
}

TEST(Sequences, StructureTest) {
  const NSchedule s = NSchedule::up_to(32000, 4);
  const auto ones = structure_test(doubling_squares(Observable::constant(1.0)), s);
  EXPECT_TRUE(ones.pass);
  EXPECT_FALSE(ones.header.empty());
  for (const auto& c : ones.checks) EXPECT_EQ(c.residual, 0.0);

  const auto centered = structure_test(doubling_squares(Observable::cosine()), s);
  EXPECT_TRUE(centered.pass);
  const auto it = std::find_if(centered.checks.begin(), centered.checks.end(),
                               [](const StructureCheck& c) { return c.shifts == std::vector<std::int64_t>{0, 0, 1}; });
  ASSERT_NE(it, centered.checks.end());
  EXPECT_NEAR(it->prediction, 0.0, 1e-12);
  EXPECT_LE(it->residual, 0.04);

  // Rotations have no product structure to test.
  EXPECT_THROW(structure_test(cyclic_orbit(2, 0, {0}), NSchedule{1000, 2, 3}), std::invalid_argument);
}
