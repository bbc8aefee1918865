#include "polyjoin/joinings.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polyjoin/errors.hpp"
#include "polyjoin/prf.hpp"
#include "polyjoin/summation.hpp"

namespace polyjoin {

std::vector<Point> sample_points(const SystemSpec& sys, const Sampling& sampling) {
  std::vector<Point> out;
  if (sampling.mode == Sampling::Mode::Enumerate) {
    const auto* c = std::get_if<CyclicRotation>(&sys.kind());
    if (c == nullptr) throw std::invalid_argument("enumeration sampling needs a cyclic system");
    for (std::uint64_t r = 0; r < c->modulus; ++r) out.push_back(CyclicPoint{r});
    return out;
  }
  if (sampling.samples < 2) throw std::invalid_argument("sampling needs at least two points");
  for (std::size_t s = 0; s < sampling.samples; ++s) out.push_back(sample(sys, derive_seed(sampling.seed, s)));
  return out;
}

namespace {

void check_grid(const std::map<GridKey, Observable>& grid, int l, std::size_t lo, std::size_t hi) {
  if (l < 0) throw std::invalid_argument("cylinder radius must be >= 0");
  for (const auto& [key, f] : grid) {
    if (key.first < -l || key.first > l) {
      throw std::invalid_argument("grid slot j = " + std::to_string(key.first) + " outside [-l, l]");
    }
    if (key.second < lo || key.second >= hi) {
      throw std::invalid_argument("grid slot i = " + std::to_string(key.second + 1) + " outside the family");
    }
  }
}

void require_spade(const PolynomialFamily& fam, bool waive) {
  if (waive) return;
  const SpadeReport r = satisfies_spade(fam);
  if (!r.ok) throw std::invalid_argument("family fails the spade condition (" + r.reason + "); waive to proceed");
}

const CyclicRotation& cyclic_of(const SystemSpec& sys) {
  const auto* c = std::get_if<CyclicRotation>(&sys.kind());
  if (c == nullptr) throw std::invalid_argument("exact oracle needs a cyclic system");
  return *c;
}

std::uint64_t step_residue(const CyclicRotation& c) {
  return mod_u64(Integer(c.step), c.modulus);
}

// Indicator entries contribute a residue table, constant entries a factor.
struct ExactFactor {
  std::vector<char> table;
  bool is_table = false;
  Rational constant = 1;
};

ExactFactor exact_factor(const SystemSpec& sys, const Observable& f, std::uint64_t m) {
  ExactFactor out;
  if (const auto* s = std::get_if<IndicatorSet>(&f.value())) {
    out.is_table = true;
    out.table.assign(m, 0);
    for (auto r : s->members) out.table.at(r) = 1;
    return out;
  }
  if (const auto* p = std::get_if<TrigPoly>(&f.value()); p != nullptr && p->terms.empty()) {
    out.constant = Rational(p->constant);
    return out;
  }
  throw IncompatibleObservable("exact oracle needs indicator or constant observables, got " + f.describe() +
                               " on " + sys.describe());
}

// p(n) mod m for n = 0, 1, ..., from the binomial coefficients.
class ModStepper {
 public:
  ModStepper(const IntPolynomial& p, std::uint64_t m) : m_(m) {
    for (const auto& c : p.coeffs()) d_.push_back(mod_u64(c, m));
  }
  std::uint64_t value() const { return d_[0]; }
  void advance() {
    for (std::size_t k = 0; k + 1 < d_.size(); ++k) {
      const std::uint64_t v = d_[k] + d_[k + 1];
      d_[k] = v >= m_ ? v - m_ : v;
    }
  }

 private:
  std::uint64_t m_;
  std::vector<std::uint64_t> d_;
};

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

void check_distinct_slopes(const std::vector<Integer>& slopes) {
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (slopes[i] == 0) throw std::invalid_argument("slopes must be nonzero");
    for (std::size_t k = 0; k < i; ++k) {
      if (slopes[i] == slopes[k]) throw std::invalid_argument("slopes must be distinct");
    }
  }
}

double three_sigma(std::optional<double> a, std::optional<double> b) {
  const double x = a.value_or(0.0);
  const double y = b.value_or(0.0);
  return 3.0 * std::sqrt(x * x + y * y);
}

}  // namespace

std::vector<Term> cylinder_terms(const PolynomialFamily& fam, const CylinderSpec& cyl) {
  check_grid(cyl.grid, cyl.l, 0, fam.size());
  std::vector<Term> out;
  for (const auto& [key, f] : cyl.grid) {
    if (f.is_constant_one()) continue;
    out.push_back(Term{cyl.action_of(key.second), fam[key.second].translated(Integer(key.first)), f});
  }
  return out;
}

Estimate sampled_average(const SystemSpec& sys, const std::vector<Term>& terms, std::int64_t start,
                         const Sampling& sampling, const NSchedule& schedule, double tol) {
  const auto sizes = schedule.sizes();
  const auto points = sample_points(sys, sampling);
  std::vector<std::vector<double>> per(points.size());
  parallel_for(points.size(), default_workers(), [&](std::size_t s) {
    per[s] = orbit_levels(bind_terms(sys, points[s], terms), sizes, start, 1);
  });
  const double count = static_cast<double>(points.size());
  std::vector<double> levels(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    CompensatedSum s;
    for (const auto& lv : per) s.add(lv[k]);
    levels[k] = s.value() / count;
  }
  CompensatedSum sq;
  for (const auto& lv : per) {
    const double d = lv.back() - levels.back();
    sq.add(d * d);
  }
  const double sd = std::sqrt(sq.value() / (count - 1.0));
  return make_estimate(sizes, std::move(levels), tol, sd / std::sqrt(count));
}

Estimate cylinder_corr(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                       const Sampling& sampling, const NSchedule& schedule, bool waive_spade, double tol) {
  require_spade(fam, waive_spade);
  return sampled_average(sys, cylinder_terms(fam, cyl), cyl.l, sampling, schedule, tol);
}

namespace {

void check_exact_work(std::uint64_t period, std::uint64_t m) {
  if (static_cast<double>(period) * static_cast<double>(m) > static_cast<double>(kExactWorkCap)) {
    throw std::invalid_argument("period * m exceeds " + std::to_string(kExactWorkCap) + "; the exact oracle refuses");
  }
}

}  // namespace

std::uint64_t joint_period(const SystemSpec& sys, const std::vector<Term>& terms) {
  const std::uint64_t m = cyclic_of(sys).modulus;
  std::uint64_t p = 1;
  for (const auto& t : terms) {
    p = std::lcm(p, period_mod(t.polynomial, m, kExactPeriodCap));
    if (p > kExactPeriodCap) {
      throw std::invalid_argument("joint period exceeds " + std::to_string(kExactPeriodCap) +
                                  "; the exact oracle refuses");
    }
  }
  return p;
}

Rational exact_term_average(const SystemSpec& sys, const std::vector<Term>& terms) {
  const auto& cyc = cyclic_of(sys);
  const std::uint64_t m = cyc.modulus;
  const std::uint64_t a = step_residue(cyc);
  Rational constant = 1;
  std::vector<ExactFactor> tables;
  std::vector<ModStepper> steppers;
  for (const auto& t : terms) {
    sys.resolve(t.action);
    ExactFactor f = exact_factor(sys, t.observable, m);
    if (f.is_table) {
      tables.push_back(std::move(f));
      steppers.emplace_back(t.polynomial, m);
    } else {
      constant *= f.constant;
    }
  }
  if (tables.empty()) return constant;
  const std::uint64_t period = joint_period(sys, terms);
  check_exact_work(period, m);
  std::vector<std::uint64_t> shift(tables.size());
  Integer total = 0;
  for (std::uint64_t n = 0; n < period; ++n) {
    for (std::size_t t = 0; t < tables.size(); ++t) {
      shift[t] = mul_mod(a, steppers[t].value(), m);
      steppers[t].advance();
    }
    std::uint64_t count = 0;
    for (std::uint64_t x = 0; x < m; ++x) {
      bool all = true;
      for (std::size_t t = 0; t < tables.size() && all; ++t) {
        std::uint64_t y = x + shift[t];
        if (y >= m) y -= m;
        all = tables[t].table[y] != 0;
      }
      count += all ? 1 : 0;
    }
    total += count;
  }
  return constant * Rational(total) / Rational(Integer(period) * m);
}

Rational cylinder_corr_exact(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl) {
  return exact_term_average(sys, cylinder_terms(fam, cyl));
}

std::vector<Term> tilde_terms(const PolynomialFamily& fam, const SplitCylinderSpec& split) {
  const std::size_t s = split.linear.size();
  if (s > fam.size()) throw std::invalid_argument("more linear observables than family members");
  for (std::size_t i = 0; i < s; ++i) {
    if (!fam[i].is_linear() || fam[i].coeffs()[0] != 0) {
      throw std::invalid_argument("member " + std::to_string(i + 1) + " must be of the form a n");
    }
  }
  check_grid(split.grid, split.l, s, fam.size());
  std::vector<Term> out;
  for (std::size_t i = 0; i < s; ++i) {
    if (!split.linear[i].is_constant_one()) out.push_back(Term{Action::Main, fam[i], split.linear[i]});
  }
  for (const auto& [key, f] : split.grid) {
    if (f.is_constant_one()) continue;
    out.push_back(Term{Action::Main, fam[key.second].translated(Integer(key.first)), f});
  }
  return out;
}

Estimate tilde_cylinder_corr(const SystemSpec& sys, const PolynomialFamily& fam, const SplitCylinderSpec& split,
                             const Sampling& sampling, const NSchedule& schedule, bool waive_spade, double tol) {
  require_spade(fam, waive_spade);
  return sampled_average(sys, tilde_terms(fam, split), split.l, sampling, schedule, tol);
}

Rational tilde_cylinder_corr_exact(const SystemSpec& sys, const PolynomialFamily& fam,
                                   const SplitCylinderSpec& split) {
  return exact_term_average(sys, tilde_terms(fam, split));
}

Estimate fj_corr(const SystemSpec& sys, const std::vector<Integer>& slopes,
                 const std::vector<ShiftedProduct>& components, const Sampling& sampling,
                 const NSchedule& schedule, double tol) {
  if (slopes.size() != components.size()) throw std::invalid_argument("one component per slope");
  check_distinct_slopes(slopes);
  std::vector<Term> terms;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    for (const auto& [t, f] : components[i].factors) {
      if (f.is_constant_one()) continue;
      terms.push_back(Term{Action::Main, IntPolynomial::linear(slopes[i]) + IntPolynomial::constant(t), f});
    }
  }
  return sampled_average(sys, terms, 0, sampling, schedule, tol);
}

Rational fj_corr_exact(const SystemSpec& sys, const std::vector<Integer>& slopes,
                       const std::vector<ShiftedProduct>& components) {
  if (slopes.size() != components.size()) throw std::invalid_argument("one component per slope");
  check_distinct_slopes(slopes);
  const auto& cyc = cyclic_of(sys);
  const std::uint64_t m = cyc.modulus;
  const std::uint64_t a = step_residue(cyc);
  Rational constant = 1;
  // g_i(y) = prod_k f_k(y + a t_k) tabulated over Z/m.
  std::vector<std::vector<char>> g(slopes.size(), std::vector<char>(m, 1));
  std::vector<std::uint64_t> rate(slopes.size());
  std::uint64_t period = 1;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    for (const auto& [t, f] : components[i].factors) {
      ExactFactor ef = exact_factor(sys, f, m);
      if (!ef.is_table) {
        constant *= ef.constant;
        continue;
      }
      const std::uint64_t off = mul_mod(a, mod_u64(t, m), m);
      for (std::uint64_t y = 0; y < m; ++y) g[i][y] &= ef.table[(y + off) % m];
    }
    rate[i] = mul_mod(a, mod_u64(slopes[i], m), m);
    period = std::lcm(period, m / std::gcd(rate[i], m));
  }
  check_exact_work(period, m);
  Integer total = 0;
  for (std::uint64_t n = 0; n < period; ++n) {
    std::uint64_t count = 0;
    for (std::uint64_t x = 0; x < m; ++x) {
      bool all = true;
      for (std::size_t i = 0; i < g.size() && all; ++i) all = g[i][(x + mul_mod(rate[i], n, m)) % m] != 0;
      count += all ? 1 : 0;
    }
    total += count;
  }
  return constant * Rational(total) / Rational(Integer(period) * m);
}

VerifyReport verify_identity_case(const SystemSpec& sys, const CylinderSpec& cyl, const Sampling& sampling,
                                  const NSchedule& schedule, std::optional<double> tol) {
  const PolynomialFamily fam({IntPolynomial::linear(1)});
  VerifyReport r;
  r.name = "identity";
  if (sys.is_cyclic()) {
    const auto& cyc = cyclic_of(sys);
    const std::uint64_t m = cyc.modulus;
    r.exact = true;
    r.lhs_exact = cylinder_corr_exact(sys, fam, cyl);
    // int prod_j f_j(T^j x) by direct enumeration of x.
    Rational constant = 1;
    std::vector<std::pair<std::uint64_t, ExactFactor>> entries;
    check_grid(cyl.grid, cyl.l, 0, 1);
    for (const auto& [key, f] : cyl.grid) {
      ExactFactor ef = exact_factor(sys, f, m);
      if (!ef.is_table) {
        constant *= ef.constant;
        continue;
      }
      entries.emplace_back(mul_mod(step_residue(cyc), mod_u64(Integer(key.first), m), m), std::move(ef));
    }
    std::uint64_t count = 0;
    for (std::uint64_t x = 0; x < m; ++x) {
      bool all = true;
      for (const auto& [off, ef] : entries) all = all && ef.table[(x + off) % m] != 0;
      count += all ? 1 : 0;
    }
    r.rhs_exact = constant * Rational(static_cast<long long>(count)) / Rational(Integer(m));
    r.lhs = to_double(*r.lhs_exact);
    r.rhs = to_double(*r.rhs_exact);
    r.residual = to_double(abs(*r.lhs_exact - *r.rhs_exact));
    r.tolerance = tol.value_or(0.0);
    r.pass = *r.lhs_exact == *r.rhs_exact;
    return r;
  }
  const Estimate lhs = cylinder_corr(sys, fam, cyl, sampling, schedule);
  const auto terms = cylinder_terms(fam, cyl);
  const IntegralValue rhs = integral_mc(
      sys,
      [&](const Point& x) {
        double prod = 1.0;
        for (const auto& t : terms) {
          prod *= observe(sys, t.observable, iterate(sys, t.action, x, t.polynomial.coeffs()[0]));
        }
        return prod;
      },
      sampling.samples * 64, sampling.seed ^ 0x1d);
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.residual = std::abs(r.lhs - r.rhs);
  r.std_error = std::sqrt(std::pow(lhs.std_error.value_or(0.0), 2) + std::pow(rhs.std_error.value_or(0.0), 2));
  r.tolerance = tol.value_or(three_sigma(lhs.std_error, rhs.std_error));
  r.pass = r.residual <= r.tolerance;
  return r;
}

VerifyReport verify_linear_case(const SystemSpec& sys, const std::vector<Integer>& slopes, const CylinderSpec& cyl,
                                const Sampling& sampling, const NSchedule& schedule, std::optional<double> tol) {
  check_distinct_slopes(slopes);
  std::vector<IntPolynomial> members;
  for (const auto& a : slopes) members.push_back(IntPolynomial::linear(a));
  const PolynomialFamily fam(members);
  check_grid(cyl.grid, cyl.l, 0, fam.size());
  std::vector<ShiftedProduct> comps(slopes.size());
  for (const auto& [key, f] : cyl.grid) {
    comps[key.second].factors.emplace_back(slopes[key.second] * key.first, f);
  }
  VerifyReport r;
  r.name = "linear";
  if (sys.is_cyclic()) {
    r.exact = true;
    r.lhs_exact = cylinder_corr_exact(sys, fam, cyl);
    r.rhs_exact = fj_corr_exact(sys, slopes, comps);
    r.lhs = to_double(*r.lhs_exact);
    r.rhs = to_double(*r.rhs_exact);
    r.residual = to_double(abs(*r.lhs_exact - *r.rhs_exact));
    r.tolerance = tol.value_or(0.0);
    r.pass = *r.lhs_exact == *r.rhs_exact;
    return r;
  }
  const Estimate lhs = cylinder_corr(sys, fam, cyl, sampling, schedule);
  const Estimate rhs = fj_corr(sys, slopes, comps, sampling, schedule);
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.residual = std::abs(r.lhs - r.rhs);
  r.std_error = lhs.std_error;
  // Same sample points on both sides; the residual is a rounding-level
  // difference unless the two routes disagree.
  r.tolerance = tol.value_or(three_sigma(lhs.std_error, rhs.std_error));
  r.pass = r.residual <= r.tolerance;
  return r;
}

VerifyReport verify_wm_product(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                               const Sampling& sampling, const NSchedule& schedule, double tol) {
  const auto lin = fam.linear_indices();
  if (lin.size() > 1) throw std::invalid_argument("verify_wm_product handles at most one linear member");
  for (auto i : fam.nonlinear_indices()) {
    if (!sys.is_weakly_mixing(cyl.action_of(i))) {
      throw std::invalid_argument("member " + std::to_string(i + 1) + " is not driven by a weakly mixing action");
    }
  }
  double pred = 1.0;
  std::vector<Term> linear_terms;
  for (const auto& [key, f] : cyl.grid) {
    if (f.is_constant_one()) continue;
    if (!lin.empty() && key.second == lin.front()) {
      const Integer shift = fam[key.second](Integer(key.first)) - fam[key.second](Integer(0));
      linear_terms.push_back(Term{cyl.action_of(key.second), IntPolynomial::constant(shift), f});
    } else {
      pred *= integral(sys, f).value;
    }
  }
  if (linear_terms.size() == 1) {
    pred *= integral(sys, linear_terms.front().observable).value;
  } else if (linear_terms.size() > 1) {
    pred *= integral_mc(
                sys,
                [&](const Point& x) {
                  double prod = 1.0;
                  for (const auto& t : linear_terms) {
                    prod *= observe(sys, t.observable, iterate(sys, t.action, x, t.polynomial.coeffs()[0]));
                  }
                  return prod;
                },
                1 << 14, sampling.seed ^ 0x3c)
                .value;
  }
  const Estimate lhs = cylinder_corr(sys, fam, cyl, sampling, schedule);
  VerifyReport r;
  r.name = "wm-product";
  r.lhs = lhs.value;
  r.rhs = pred;
  r.residual = std::abs(r.lhs - r.rhs);
  r.std_error = lhs.std_error;
  r.tolerance = tol;
  r.pass = r.residual <= tol;
  return r;
}

Estimate component_corr(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                        const Point& x, const NSchedule& schedule, double tol) {
  const auto sizes = schedule.sizes();
  return make_estimate(sizes, orbit_levels(bind_terms(sys, x, cylinder_terms(fam, cyl)), sizes, cyl.l), tol);
}

ProductComponentsResult verify_product_components(const ProductSystem& sys, const IntPolynomial& p, int l,
                                                  const Observable& h, const Observable& g,
                                                  const ProductPoint& x, const NSchedule& schedule, double tol) {
  if (p.degree() < 2) throw std::invalid_argument("product components need a nonlinear polynomial");
  if (l < 0) throw std::invalid_argument("cylinder radius must be >= 0");
  if (!sys.shift.is_weakly_mixing(Action::Main)) throw std::invalid_argument("the second factor must be a shift");
  std::vector<OrbitFactor> nil;
  std::vector<OrbitFactor> joint;
  for (int j = -l; j <= l; ++j) {
    const IntPolynomial q = p.translated(Integer(j));
    nil.push_back(OrbitFactor{std::cref(sys.nil), x.nil, Term{Action::Main, q, h}});
    joint.push_back(nil.back());
    joint.push_back(OrbitFactor{std::cref(sys.shift), x.shift, Term{Action::Main, q, g}});
  }
  const auto sizes = schedule.sizes();
  ProductComponentsResult r;
  r.joint = make_estimate(sizes, orbit_levels(joint, sizes, l), kDefaultTolerance);
  r.nil_part = make_estimate(sizes, orbit_levels(nil, sizes, l), kDefaultTolerance);
  r.shift_factor = std::pow(integral(sys.shift, g).value, 2 * l + 1);
  r.prediction = r.nil_part.value * r.shift_factor;
  r.residual = std::abs(r.joint.value - r.prediction);
  r.pass = r.residual <= tol;
  return r;
}

}  // namespace polyjoin
