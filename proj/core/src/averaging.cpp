#include "polyjoin/averaging.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polyjoin {

std::vector<OrbitFactor> bind_terms(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms) {
  std::vector<OrbitFactor> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(OrbitFactor{std::cref(sys), x, t});
  return out;
}

namespace {

void validate_factors(const std::vector<OrbitFactor>& factors) {
  for (const auto& f : factors) {
    const SystemSpec& sys = f.system.get();
    check_point(sys, f.point);
    check_observable(sys, f.term.observable);
    sys.resolve(f.term.action);
  }
}

}  // namespace

CompensatedSum orbit_product_sum(const std::vector<OrbitFactor>& factors, std::int64_t start, std::uint64_t lo,
                                 std::uint64_t hi, int workers) {
  validate_factors(factors);
  std::vector<const OrbitFactor*> live;
  double constant = 1.0;
  for (const auto& f : factors) {
    const auto* p = std::get_if<TrigPoly>(&f.term.observable.value());
    if (p != nullptr && p->terms.empty()) {
      constant *= p->constant;
    } else {
      live.push_back(&f);
    }
  }
  return block_sum(lo, hi, workers, [&](std::uint64_t b, std::uint64_t e, CompensatedSum& acc) {
    const Integer first = Integer(start) + Integer(b);
    std::vector<PolyStepper> steppers;
    steppers.reserve(live.size());
    for (const auto* f : live) steppers.emplace_back(f->term.polynomial, first);
    for (std::uint64_t n = b; n < e; ++n) {
      double prod = constant;
      for (std::size_t i = 0; i < live.size(); ++i) {
        const OrbitFactor& f = *live[i];
        const SystemSpec& sys = f.system.get();
        prod *= observe(sys, f.term.observable, iterate(sys, f.term.action, f.point, steppers[i].value()));
        steppers[i].advance();
      }
      acc.add(prod);
    }
  });
}

std::vector<double> orbit_levels(const std::vector<OrbitFactor>& factors, const std::vector<std::uint64_t>& sizes,
                                 std::int64_t start, int workers) {
  std::vector<double> out;
  out.reserve(sizes.size());
  CompensatedSum running;
  std::uint64_t done = 0;
  for (std::uint64_t n : sizes) {
    if (n < done) throw std::invalid_argument("orbit_levels: sizes must be increasing");
    running.add(orbit_product_sum(factors, start, done, n, workers));
    done = n;
    out.push_back(running.value() / static_cast<double>(n));
  }
  return out;
}

double finite_multiple_average(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms,
                               std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("finite_multiple_average: N must be positive");
  return orbit_product_sum(bind_terms(sys, x, terms), 0, 0, n).value() / static_cast<double>(n);
}

Estimate limit_multiple_average(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms,
                                const NSchedule& schedule, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto sizes = schedule.sizes();
  auto levels = orbit_levels(bind_terms(sys, x, terms), sizes);
  return make_estimate(sizes, std::move(levels), tol);
}

L2Profile l2_profile(const SystemSpec& sys, const std::vector<Term>& terms, const NSchedule& schedule,
                     std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("l2_profile needs at least two samples");
  L2Profile out;
  out.sizes = schedule.sizes();
  std::vector<std::vector<double>> per_sample(samples);
  parallel_for(samples, default_workers(), [&](std::size_t s) {
    const Point x = sample(sys, derive_seed(seed, s));
    per_sample[s] = orbit_levels(bind_terms(sys, x, terms), out.sizes, 0, 1);
  });
  for (std::size_t k = 0; k + 1 < out.sizes.size(); ++k) {
    CompensatedSum sq;
    for (const auto& lv : per_sample) {
      const double d = lv[k + 1] - lv[k];
      sq.add(d * d);
    }
    out.rms.push_back(std::sqrt(sq.value() / static_cast<double>(samples)));
  }
  CompensatedSum mean;
  for (const auto& lv : per_sample) {
    out.final_values.push_back(lv.back());
    mean.add(lv.back());
  }
  out.mean_final = mean.value() / static_cast<double>(samples);
  return out;
}

RecurrenceResult recurrence_average(const SystemSpec& sys, const Observable& set, const PolynomialFamily& fam,
                                    const NSchedule& schedule) {
  const auto* cyc = std::get_if<CyclicRotation>(&sys.kind());
  if (cyc == nullptr) throw std::invalid_argument("recurrence_average: exact evaluation needs a cyclic system");
  const auto* ind = std::get_if<IndicatorSet>(&set.value());
  if (ind == nullptr) throw std::invalid_argument("recurrence_average: the set must be an indicator");
  check_observable(sys, set);
  if (ind->members.empty()) throw std::invalid_argument("recurrence_average: empty set");
  const std::uint64_t m = cyc->modulus;

  std::uint64_t period = 1;
  for (const auto& p : fam) period = std::lcm(period, period_mod(p, m));

  std::vector<PolyStepper> steppers;
  for (const auto& p : fam) steppers.emplace_back(p, Integer(0));
  std::vector<std::uint64_t> shift(fam.size());
  // count(n) = #{x in A : x + a p_i(n) in A for all i}
  auto count_at = [&]() {
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const Point moved = iterate(sys, Action::Main, CyclicPoint{0}, steppers[i].value());
      shift[i] = std::get<CyclicPoint>(moved).residue;
    }
    std::uint64_t c = 0;
    for (std::uint64_t x : ind->members) {
      bool all = true;
      for (std::size_t i = 0; i < fam.size() && all; ++i) {
        std::uint64_t y = x + shift[i];
        if (y >= m) y -= m;
        all = indicator_contains(*ind, y);
      }
      c += all ? 1 : 0;
    }
    for (auto& s : steppers) s.advance();
    return c;
  };

  const auto sizes = schedule.sizes();
  const std::uint64_t horizon = std::max(period, sizes.back());
  std::vector<double> levels;
  Integer period_total = 0;
  Integer running = 0;
  std::size_t next = 0;
  for (std::uint64_t n = 0; n < horizon; ++n) {
    const std::uint64_t c = count_at();
    running += c;
    if (n + 1 == period) period_total = running;
    while (next < sizes.size() && sizes[next] == n + 1) {
      levels.push_back(to_double(Rational(running) / Rational(Integer(sizes[next]) * m)));
      ++next;
    }
  }
  RecurrenceResult out;
  out.period = period;
  out.exact = Rational(period_total) / Rational(Integer(period) * m);
  out.estimate = make_estimate(sizes, std::move(levels), kDefaultTolerance);
  return out;
}

Estimate weighted_average(const SystemSpec& sys, const Point& x, const NilWeight& weight,
                          const std::vector<Term>& terms, const NSchedule& schedule, double tol) {
  auto factors = bind_terms(sys, x, terms);
  factors.push_back(OrbitFactor{std::cref(weight.system), weight.point,
                                Term{Action::Main, weight.polynomial, weight.observable}});
  const auto sizes = schedule.sizes();
  return make_estimate(sizes, orbit_levels(factors, sizes), tol);
}

VdcResult vdc_check(std::span<const double> values, std::size_t h_max) {
  const std::size_t n = values.size();
  if (h_max == 0 || h_max >= n) throw std::invalid_argument("vdc_check: need 1 <= H < N");
  CompensatedSum total;
  for (double v : values) total.add(v);
  const double mean = total.value() / static_cast<double>(n);
  VdcResult r;
  r.lhs = mean * mean;
  CompensatedSum outer;
  for (std::size_t h = 1; h <= h_max; ++h) {
    CompensatedSum inner;
    for (std::size_t k = 0; k + h < n; ++k) inner.add(values[k] * values[k + h]);
    outer.add(std::abs(inner.value() / static_cast<double>(n - h)));
  }
  r.rhs = outer.value() / static_cast<double>(h_max);
  return r;
}

double vdc_slack(std::size_t n, std::size_t h_max, double sup_norm) {
  return 4.0 * sup_norm * sup_norm *
         (static_cast<double>(h_max) / static_cast<double>(n) + 1.0 / static_cast<double>(h_max));
}

}  // namespace polyjoin
