#include "polyjoin/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "polyjoin/averaging.hpp"
#include "polyjoin/dynamics.hpp"
#include "polyjoin/joinings.hpp"
#include "polyjoin/polynomial.hpp"
#include "polyjoin/seminorms.hpp"
#include "polyjoin/sequences.hpp"

namespace polyjoin::app {

namespace {

struct Check {
  bool ok = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Golden {
  std::uint64_t seed;
  i128 block;
  std::uint64_t word;
};

// Reference outputs of the published PRF.
constexpr Golden kGolden[] = {
    {0, 0, 0xd9dfee5d0039b834ULL},
    {0, 1, 0x15f5a3a08e891d6bULL},
    {1, 0, 0x31f5b693b9066f5aULL},
    {0x0123456789abcdefULL, 42, 0x766506894a8b8956ULL},
    {0xffffffffffffffffULL, -1, 0x5d6fa012db0a163bULL},
    {7, static_cast<i128>(1) << 64, 0xf956352a9fddc438ULL},
};

Check golden_vectors(const PrfConstants& c) {
  int bad = 0;
  for (const auto& g : kGolden) bad += prf_word(g.seed, g.block, c) != g.word ? 1 : 0;
  bad += read_bits(0, 60, 8, c) != 0x41 ? 1 : 0;
  bad += derive_seed(1, 0, c) != 0x9e3bd3981e6c799dULL ? 1 : 0;
  bad += derive_seed(1, 1, c) != 0x5b00f34b64f59713ULL ? 1 : 0;
  return {bad == 0, bad == 0 ? "9/9 golden vectors" : std::to_string(bad) + "/9 golden vectors differ"};
}

SystemSpec circle(const PrfConstants& c) {
  SystemSpec s = SystemSpec::circle_bitstream();
  s.set_prf(c);
  return s;
}

SystemSpec bernoulli(const PrfConstants& c) {
  SystemSpec s = SystemSpec::bernoulli();
  s.set_prf(c);
  return s;
}

// Random nonempty residue set drawn from the published stream.
std::vector<std::uint64_t> random_subset(std::uint64_t m, std::uint64_t seed) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t r = 0; r < m; ++r) {
    if (read_bits(seed, static_cast<i128>(r), 1) != 0) out.push_back(r);
  }
  if (out.empty()) out.push_back(read_bits(seed, 64, 8) % m);
  return out;
}

CylinderSpec random_grid(std::uint64_t m, std::size_t d, std::uint64_t seed) {
  CylinderSpec cyl;
  cyl.l = static_cast<int>(read_bits(seed, 200, 2) % 3);
  std::uint64_t k = 0;
  for (int j = -cyl.l; j <= cyl.l; ++j) {
    for (std::size_t i = 0; i < d; ++i, ++k) {
      const std::uint64_t s = derive_seed(seed, k);
      if (read_bits(s, 300, 2) == 0) continue;  // slot left at 1
      cyl.grid.emplace(GridKey{j, i}, Observable::indicator(random_subset(m, s)));
    }
  }
  return cyl;
}

// --- criteria -----------------------------------------------------------------

Check weyl_average() {
  const SystemSpec sys = SystemSpec::torus(128);
  const Term t{Action::Main, IntPolynomial::power(2), Observable::cosine()};
  const Estimate e = limit_multiple_average(sys, sample(sys, 1), {t}, NSchedule::up_to(1'000'000, 7));
  return {std::abs(e.value) <= 0.02, "|avg| = " + num(std::abs(e.value)) + " <= 0.02"};
}

Check hk_oracle() {
  const SystemSpec sys = SystemSpec::torus(128);
  const Observable f = Observable::cosine();
  const double k1 = hk_seminorm(sys, f, 1).value;
  const double k2 = hk_seminorm(sys, f, 2).value;
  const double oracle = std::pow(1.0 / 8.0, 0.25);

  // Nested brute-force average at H = N = 10^4 along one orbit.
  constexpr std::size_t kH = 10000;
  constexpr std::size_t kN = 10000;
  std::vector<double> a(kN + kH + 1);
  const Point x = sample(sys, 0x5eed);
  for (std::size_t m = 0; m < a.size(); ++m) a[m] = observe(sys, f, iterate(sys, Action::Main, x, Integer(m)));
  double outer = 0.0;
  for (std::size_t h = 1; h <= kH; ++h) {
    double inner = 0.0;
    for (std::size_t n = 0; n < kN; ++n) inner += a[n] * a[n + h];
    inner /= static_cast<double>(kN);
    outer += inner * inner;
  }
  const double brute = std::pow(outer / static_cast<double>(kH), 0.25);
  const bool ok = k1 == 0.0 && std::abs(k2 - oracle) <= 0.01 && std::abs(brute - oracle) <= 0.01;
  return {ok, "|||cos|||_1 = " + num(k1) + ", |||cos|||_2 = " + num(k2) + " (oracle " + num(oracle) +
                  ", brute force " + num(brute) + ")"};
}

Check monotonicity(const PrfConstants& c) {
  TrigPoly mixed;
  mixed.constant = 0.3;
  mixed.terms = {{1, 1.0, 0.0}, {2, 0.5, 0.125}};
  TrigPoly fiber;
  fiber.terms = {{1, 1.0, 0.0}};
  fiber.coordinate = 1;
  const std::vector<std::pair<SystemSpec, Observable>> pairs{
      {SystemSpec::torus(128), Observable::cosine()},
      {SystemSpec::torus(128), Observable::trig(mixed)},
      {SystemSpec::skew(128), Observable::trig(fiber)},
      {SystemSpec::cyclic(12), Observable::indicator({0, 1, 5})},
      {circle(c), Observable::cosine()},
      {bernoulli(c), Observable::bitword(2, {1.0, -1.0, 0.5, 0.2})},
  };
  SeminormBudget b;
  b.H = 64;
  b.N = 16384;
  std::string detail;
  bool ok = true;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [sys, f] = pairs[p];
    double v[3];
    for (int k = 1; k <= 3; ++k) v[k - 1] = hk_seminorm(sys, f, k, b).value;
    const bool pair_ok = v[0] <= v[1] + 0.03 && v[1] <= v[2] + 0.03;
    ok = ok && pair_ok;
    detail += (p ? "; " : "") + std::string(sys.kind_name()) + " " + num(v[0]) + "/" + num(v[1]) + "/" + num(v[2]);
  }
  return {ok, detail};
}

Check wm_uniformity(const PrfConstants& c) {
  const SystemSpec sys = circle(c);
  SeminormBudget b;
  b.H = 1000;
  b.N = 100000;
  // Main action of the circle system is "double".
  const double v = hk_seminorm(sys, Observable::cosine(), 2, b).value;
  return {v <= 0.02, "|||cos|||_2 = " + num(v) + " <= 0.02"};
}

Check product_structure(const PrfConstants& c) {
  const SystemSpec sys = circle(c);
  const PolynomialFamily fam({IntPolynomial::power(2)});
  const NSchedule sched = NSchedule::up_to(100000, 6);
  const Sampling smp = Sampling::sampled(32, 1);
  TrigPoly half;
  half.constant = 1.0;
  half.terms = {{1, 0.5, 0.0}};
  CylinderSpec centered{1, {}, {Action::Double}};
  CylinderSpec mixed{1, {}, {Action::Double}};
  for (int j = -1; j <= 1; ++j) {
    centered.grid.emplace(GridKey{j, 0}, Observable::cosine());
    mixed.grid.emplace(GridKey{j, 0}, Observable::trig(half));
  }
  const Estimate a = cylinder_corr(sys, fam, centered, smp, sched);
  const Estimate b = cylinder_corr(sys, fam, mixed, smp, sched);
  const double se = b.std_error.value_or(INFINITY);
  const bool ok = std::abs(a.value) <= 0.03 && std::abs(b.value - 1.0) <= 3.0 * se && se <= 0.01;
  return {ok, "centered " + num(a.value) + ", mixed " + num(b.value) + " (stderr " + num(se) + ")"};
}

Check identity_case() {
  const SystemSpec sys = SystemSpec::cyclic(7);
  int good = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const VerifyReport r = verify_identity_case(sys, random_grid(7, 1, derive_seed(0x1d, t)), Sampling::enumerate());
    good += r.exact && r.lhs_exact && r.rhs_exact && *r.lhs_exact == *r.rhs_exact ? 1 : 0;
  }
  return {good == 20, std::to_string(good) + "/20 exact matches"};
}

Check linear_case() {
  const SystemSpec sys = SystemSpec::cyclic(12);
  int good = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const VerifyReport r =
        verify_linear_case(sys, {Integer(1), Integer(2)}, random_grid(12, 2, derive_seed(0x11, t)), Sampling::enumerate());
    good += r.exact && r.lhs_exact && r.rhs_exact && *r.lhs_exact == *r.rhs_exact ? 1 : 0;
  }
  return {good == 20, std::to_string(good) + "/20 exact matches"};
}

Check spade_example() {
  const PolynomialFamily fam(
      {IntPolynomial::parse("n^2"), IntPolynomial::parse("n^2 + 6n"), IntPolynomial::parse("n^2 + 10n")});
  const SpadeReduction red = reduce_to_spade(fam);
  const SpadeReport rep = satisfies_spade(fam);
  bool ok = red.family.size() == 1 && red.family[0] == IntPolynomial::power(2) && red.mapping.size() == 3;
  const Integer want[] = {0, 3, 5};
  for (std::size_t i = 0; ok && i < 3; ++i) ok = red.mapping[i].first == 0 && red.mapping[i].second == want[i];
  ok = ok && !rep.ok && rep.witness && *rep.witness == 3;
  return {ok, "reduced to {" + red.family[0].to_string() + "}, rejected with witness t = " +
                  (rep.witness ? to_string(*rep.witness) : std::string("none"))};
}

Check no_commutativity(const PrfConstants& c) {
  const SystemSpec sys = circle(c);
  const std::vector<Term> terms{{Action::Rotate, IntPolynomial::linear(1), Observable::cosine()},
                                {Action::Double, IntPolynomial::power(2), Observable::cosine()}};
  const L2Profile p = l2_profile(sys, terms, NSchedule::up_to(320000, 8), 16, 7);
  const bool ok = p.rms.back() <= 0.05 && std::abs(p.mean_final) <= 0.05;
  return {ok, "final rms " + num(p.rms.back()) + ", mean " + num(p.mean_final)};
}

Check furstenberg_system(const PrfConstants& c) {
  const SystemSpec sys = circle(c);
  const SequenceSource z(OrbitSequence{sys, Action::Double, sample(sys, 3), IntPolynomial::power(2), Observable::cosine()});
  const NSchedule sched = NSchedule::up_to(100000, 6);
  const double c00 = seq_corr(z, {0, 0}, sched).value;
  const double c01 = seq_corr(z, {0, 1}, sched).value;
  const StructureReport st = structure_test(z, sched);
  const double pr = generic_cylinder(z, 2, 2, 100000).product_residual();
  const bool ok = std::abs(c00 - 0.5) <= 0.03 && std::abs(c01) <= 0.03 && st.pass && pr <= 0.05;
  return {ok, "c(0,0) = " + num(c00) + ", c(0,1) = " + num(c01) + ", structure " + (st.pass ? "pass" : "fail") +
                  " (" + std::to_string(st.checks.size()) + " tuples), product residual " + num(pr)};
}

Check oracle_equivalence() {
  std::string detail;
  bool ok = true;
  for (std::uint64_t m : {5u, 8u, 12u}) {
    const SystemSpec sys = SystemSpec::cyclic(m);
    const PolynomialFamily fam({IntPolynomial::linear(1), IntPolynomial::power(2)});
    const CylinderSpec cyl{1,
                           {{{-1, 0}, Observable::indicator({0, 1, 2, 3})},
                            {{0, 1}, Observable::indicator({0, 1, 3})},
                            {{1, 0}, Observable::indicator({1, 2, 3, 4})},
                            {{1, 1}, Observable::indicator({0, 1, 4})}},
                           {}};
    const Rational exact = cylinder_corr_exact(sys, fam, cyl);
    const std::uint64_t period = joint_period(sys, cylinder_terms(fam, cyl));
    const NSchedule full{period, 2, 2};
    const Estimate en = cylinder_corr(sys, fam, cyl, Sampling::enumerate(), full);
    const double scale = static_cast<double>(m) * static_cast<double>(period);
    const Rational rounded(Integer(std::llround(en.level_values.front() * scale)), Integer(m) * period);
    const Estimate sm = cylinder_corr(sys, fam, cyl, Sampling::sampled(32, m), full);
    const double se = sm.std_error.value_or(0.0);
    const double gap = std::abs(sm.level_values.front() - to_double(exact));
    const bool m_ok = exact > 0 && rounded == exact && gap <= std::max(3.0 * se, 1e-12);
    ok = ok && m_ok;
    detail += (detail.empty() ? "" : "; ") + std::string("Z/") + std::to_string(m) + " exact " + to_string(exact) +
              (rounded == exact ? " =" : " !=") + " enumerated, sampled gap " + num(gap) + " (3se " + num(3 * se) +
              ")";
  }
  return {ok, detail};
}

Check vdc_trials() {
  constexpr std::size_t kN = 10000;
  constexpr std::size_t kH = 100;
  std::vector<double> z(kN);
  double worst = -INFINITY;
  int bad = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const std::uint64_t seed = derive_seed(0x7dc, t);
    for (std::size_t w = 0; w < kN / 64 + 1; ++w) {
      const std::uint64_t word = prf_word(seed, static_cast<i128>(w));
      for (std::size_t b = 0; b < 64 && 64 * w + b < kN; ++b) z[64 * w + b] = (word >> (63 - b)) & 1 ? 1.0 : -1.0;
    }
    const VdcResult r = vdc_check(z, kH);
    const double margin = r.lhs - r.rhs - vdc_slack(kN, kH, 1.0);
    worst = std::max(worst, margin);
    bad += margin > 0.0 ? 1 : 0;
  }
  return {bad == 0, std::to_string(1000 - bad) + "/1000 trials hold, worst lhs - rhs - slack = " + num(worst)};
}

Check recurrence_positive() {
  const SystemSpec sys = SystemSpec::cyclic(8);
  const PolynomialFamily fam({IntPolynomial::linear(1), IntPolynomial::power(2)});
  const RecurrenceResult r = recurrence_average(sys, Observable::indicator({0, 1}), fam, NSchedule{8, 2, 4});
  // Independent count over one period of (n, n^2) mod 8.
  int hits = 0;
  for (int n = 0; n < 8; ++n) {
    for (int x : {0, 1}) {
      const int a = (x + n) % 8;
      const int b = (x + n * n) % 8;
      hits += (a <= 1 && b <= 1) ? 1 : 0;
    }
  }
  const Rational brute(hits, 64);
  const bool ok = r.exact > 0 && r.exact == brute && r.exact == Rational(3, 64);
  return {ok, "exact " + to_string(r.exact) + ", brute force " + to_string(brute)};
}

Check component_product(const PrfConstants& c) {
  const ProductSystem ps{SystemSpec::skew(128), bernoulli(c)};
  TrigPoly h;
  h.constant = 1.0;
  h.terms = {{1, 0.5, 0.0}};
  h.coordinate = 1;
  const ProductPoint x{sample(ps.nil, 11), sample(ps.shift, 12)};
  const auto r = verify_product_components(ps, IntPolynomial::power(2), 1, Observable::trig(h),
                                           Observable::bitword(1, {0.5, 1.5}), x, NSchedule::up_to(100000, 6));
  return {r.residual <= 0.05, "joint " + num(r.joint.value) + " vs predicted " + num(r.prediction) + ", residual " +
                                  num(r.residual)};
}

struct Criterion {
  int id;
  const char* title;
  double budget;
  bool bitstream;
  std::function<Check(const PrfConstants&)> run;
};

std::vector<Criterion> criteria() {
  return {
      {0, "PRF golden vectors", 1, false, golden_vectors},
      {1, "Weyl average of cos(n^2) on the torus", 10, false, [](auto&) { return weyl_average(); }},
      {2, "Host-Kra seminorm oracle", 30, false, [](auto&) { return hk_oracle(); }},
      {3, "seminorm monotonicity", 60, true, monotonicity},
      {4, "weak-mixing uniformity", 20, true, wm_uniformity},
      {5, "product structure under doubling", 60, true, product_structure},
      {6, "identity case, exact", 1, false, [](auto&) { return identity_case(); }},
      {7, "linear case, exact", 1, false, [](auto&) { return linear_case(); }},
      {8, "spade reduction example", 1, false, [](auto&) { return spade_example(); }},
      {9, "rotate/double non-commuting average", 120, true, no_commutativity},
      {10, "Furstenberg system of cos(2^(n^2) x)", 60, true, furstenberg_system},
      {11, "Monte Carlo vs exact oracle", 10, false, [](auto&) { return oracle_equivalence(); }},
      {12, "van der Corput diagnostic", 10, false, [](auto&) { return vdc_trials(); }},
      {13, "recurrence positivity", 1, false, [](auto&) { return recurrence_positive(); }},
      {14, "component product structure", 60, true, component_product},
  };
}

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteOptions& opts, std::ostream* out) {
  std::vector<CriterionResult> results;
  bool prf_ok = true;
  for (const auto& c : criteria()) {
    CriterionResult r{c.id, c.title, "", "", 0.0, c.budget};
    if (!opts.only.empty() && !opts.only.count(c.id) && c.id != 0) continue;
    if (opts.quick && quick_skipped().count(c.id)) {
      r.status = "skip";
      r.detail = "skipped (--quick)";
    } else if (c.bitstream && !prf_ok) {
      r.status = "fail";
      r.detail = "PRF constants do not reproduce the golden vectors";
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Check k = c.run(opts.prf);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.detail = k.detail;
        const bool in_time = r.seconds <= c.budget;
        if (!in_time) r.detail += "; took " + num(r.seconds) + " s, budget " + num(c.budget) + " s";
        r.status = k.ok && in_time ? "pass" : "fail";
      } catch (const std::exception& e) {
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.status = "fail";
        r.detail = std::string("error: ") + e.what();
      }
    }
    if (c.id == 0) prf_ok = r.status == "pass";
    if (out != nullptr) {
      char head[96];
      std::snprintf(head, sizeof head, "%2d  %-4s  %7.2fs  ", r.id, r.status.c_str(), r.seconds);
      *out << head << r.title << ": " << r.detail << std::endl;
    }
    results.push_back(std::move(r));
  }
  return results;
}

int suite_exit_code(const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    if (r.status == "fail") return 1;
  }
  return 0;
}

}  // namespace polyjoin::app
