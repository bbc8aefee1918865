#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "polyjoin/summation.hpp"

using namespace polyjoin;

TEST(Summation, CompensationRecoversSmallTerms) {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(Summation, BlockSumIndependentOfWorkers) {
  auto fill = [](std::uint64_t lo, std::uint64_t hi, CompensatedSum& acc) {
    for (std::uint64_t n = lo; n < hi; ++n) acc.add(std::sin(0.001 * static_cast<double>(n)) / (1.0 + n));
  };
  const double one = block_sum(17, 100000, 1, fill).value();
  for (int w : {2, 3, 8}) EXPECT_EQ(block_sum(17, 100000, w, fill).value(), one);
}

TEST(Summation, SplitRangesAgreeClosely) {
  auto fill = [](std::uint64_t lo, std::uint64_t hi, CompensatedSum& acc) {
    for (std::uint64_t n = lo; n < hi; ++n) acc.add(1.0 / (1.0 + static_cast<double>(n)));
  };
  CompensatedSum parts = block_sum(0, 50000, 4, fill);
  parts.add(block_sum(50000, 200000, 4, fill));
  EXPECT_NEAR(parts.value(), block_sum(0, 200000, 4, fill).value(), std::ldexp(1.0, -40));
}

TEST(Summation, EmptyRange) {
  auto fill = [](std::uint64_t, std::uint64_t, CompensatedSum& acc) { acc.add(1.0); };
  EXPECT_EQ(block_sum(5, 5, 4, fill).value(), 0.0);
}

TEST(Summation, ParallelForVisitsEachIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Summation, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Summation, TreeReduceOfOnes) {
  std::vector<CompensatedSum> parts(13);
  for (auto& p : parts) p.add(1.0);
  EXPECT_EQ(tree_reduce(parts).value(), 13.0);
}
