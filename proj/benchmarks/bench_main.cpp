#include <benchmark/benchmark.h>

#include "polyjoin/averaging.hpp"
#include "polyjoin/dynamics.hpp"
#include "polyjoin/joinings.hpp"
#include "polyjoin/prf.hpp"
#include "polyjoin/seminorms.hpp"

using namespace polyjoin;

static void BM_PrfWord(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(prf_word(0x5eed, static_cast<i128>(i++)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PrfWord);

static void BM_ReadBits(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  i128 index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(read_bits(7, index, width));
    index += 61;
  }
}
BENCHMARK(BM_ReadBits)->Arg(1)->Arg(64);

static void BM_Iterate(benchmark::State& state, SystemSpec sys, Action action) {
  const Point x = sample(sys, 1);
  const Integer n = (Integer(1) << static_cast<unsigned>(state.range(0))) + 12345;
  for (auto _ : state) benchmark::DoNotOptimize(iterate(sys, action, x, n));
}
BENCHMARK_CAPTURE(BM_Iterate, torus, SystemSpec::torus(), Action::Main)->Arg(20)->Arg(96);
BENCHMARK_CAPTURE(BM_Iterate, skew, SystemSpec::skew(), Action::Main)->Arg(20)->Arg(96);
BENCHMARK_CAPTURE(BM_Iterate, circle_rotate, SystemSpec::circle_bitstream(), Action::Rotate)->Arg(20)->Arg(96);
BENCHMARK_CAPTURE(BM_Iterate, circle_double, SystemSpec::circle_bitstream(), Action::Double)->Arg(20)->Arg(96);

static void BM_MultipleAverage(benchmark::State& state) {
  const SystemSpec sys = SystemSpec::torus();
  const std::vector<Term> terms{{Action::Main, IntPolynomial::parse("n"), Observable::cosine()},
                                {Action::Main, IntPolynomial::parse("n^2"), Observable::cosine()}};
  const Point x = sample(sys, 2);
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_multiple_average(sys, x, terms, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MultipleAverage)->Arg(1 << 14)->Arg(1 << 18)->Unit(benchmark::kMillisecond);

static void BM_DoublingSquares(benchmark::State& state) {
  const SystemSpec sys = SystemSpec::circle_bitstream();
  const std::vector<Term> terms{{Action::Double, IntPolynomial::parse("n^2"), Observable::cosine()}};
  const Point x = sample(sys, 3);
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_multiple_average(sys, x, terms, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DoublingSquares)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

static void BM_ExactCylinder(benchmark::State& state) {
  const auto m = static_cast<std::uint64_t>(state.range(0));
  const SystemSpec sys = SystemSpec::cyclic(m);
  const PolynomialFamily fam({IntPolynomial::parse("n"), IntPolynomial::parse("n^2")});
  const CylinderSpec c{1, {{{0, 0}, Observable::indicator({0, 1})}, {{1, 1}, Observable::indicator({0, 2})}}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(cylinder_corr_exact(sys, fam, c));
}
BENCHMARK(BM_ExactCylinder)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_Seminorm(benchmark::State& state) {
  const SystemSpec sys = SystemSpec::torus();
  SeminormBudget b;
  b.H = 64;
  b.N = 4096;
  for (auto _ : state) benchmark::DoNotOptimize(hk_seminorm(sys, Observable::cosine(), 2, b));
}
BENCHMARK(BM_Seminorm)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
