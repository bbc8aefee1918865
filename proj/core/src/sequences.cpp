#include "polyjoin/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "polyjoin/averaging.hpp"
#include "polyjoin/errors.hpp"
#include "polyjoin/summation.hpp"

namespace polyjoin {

std::pair<double, double> observable_range(const Observable& f) {
  if (const auto* p = std::get_if<TrigPoly>(&f.value())) {
    double r = 0.0;
    for (const auto& t : p->terms) r += std::abs(t.coefficient);
    return {p->constant - r, p->constant + r};
  }
  if (const auto* b = std::get_if<BitWord>(&f.value())) {
    const auto [mn, mx] = std::minmax_element(b->table.begin(), b->table.end());
    return {*mn, *mx};
  }
  return {0.0, 1.0};
}

SequenceSource::SequenceSource(OrbitSequence s) : v_(std::move(s)) {
  const auto& o = std::get<OrbitSequence>(v_);
  check_point(o.system, o.point);
  check_observable(o.system, o.observable);
  o.system.resolve(o.action);
  std::tie(lo_, hi_) = observable_range(o.observable);
}

SequenceSource::SequenceSource(ExplicitSequence s) : v_(std::move(s)) {
  const auto& e = std::get<ExplicitSequence>(v_);
  if (!(e.lo <= e.hi)) throw std::invalid_argument("explicit sequence: empty range");
  for (double v : e.values) {
    if (!(v >= e.lo && v <= e.hi)) throw std::invalid_argument("explicit sequence: value outside declared range");
  }
  lo_ = e.lo;
  hi_ = e.hi;
}

SequenceSource SequenceSource::constant(double c, std::size_t length) {
  return SequenceSource(ExplicitSequence{std::vector<double>(length, c), std::min(c, 0.0), std::max(c, 0.0)});
}

double SequenceSource::bound() const { return std::max(std::abs(lo_), std::abs(hi_)); }

std::uint64_t SequenceSource::length() const {
  if (const auto* e = std::get_if<ExplicitSequence>(&v_)) return e->values.size();
  return UINT64_MAX;
}

std::vector<double> SequenceSource::values(std::uint64_t begin, std::uint64_t count) const {
  std::vector<double> out(count);
  if (const auto* e = std::get_if<ExplicitSequence>(&v_)) {
    if (begin + count > e->values.size()) throw std::out_of_range("explicit sequence too short");
    std::copy_n(e->values.begin() + static_cast<std::ptrdiff_t>(begin), count, out.begin());
    return out;
  }
  const auto& o = std::get<OrbitSequence>(v_);
  const std::uint64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  parallel_for(blocks, default_workers(), [&](std::size_t b) {
    const std::uint64_t lo = b * kBlockSize;
    const std::uint64_t hi = std::min(count, lo + kBlockSize);
    PolyStepper step(o.polynomial, Integer(begin + lo));
    for (std::uint64_t k = lo; k < hi; ++k) {
      out[k] = observe(o.system, o.observable, iterate(o.system, o.action, o.point, step.value()));
      step.advance();
    }
  });
  return out;
}

namespace {

void check_shifts(const std::vector<std::int64_t>& shifts, std::uint64_t n) {
  if (shifts.empty()) throw std::invalid_argument("seq_corr needs at least one shift");
  for (auto s : shifts) {
    if (static_cast<double>(std::abs(s)) > static_cast<double>(n) / 10.0) {
      throw std::invalid_argument("shift " + std::to_string(s) + " exceeds N/10");
    }
  }
}

}  // namespace

Estimate seq_corr(const SequenceSource& z, const std::vector<std::int64_t>& shifts, const NSchedule& schedule,
                  double tol) {
  const auto sizes = schedule.sizes();
  check_shifts(shifts, sizes.back());
  const auto [mn, mx] = std::minmax_element(shifts.begin(), shifts.end());
  const std::int64_t start = std::max<std::int64_t>(0, -*mn);

  if (const auto* o = std::get_if<OrbitSequence>(&z.value())) {
    std::vector<OrbitFactor> factors;
    for (auto s : shifts) {
      factors.push_back(
          OrbitFactor{std::cref(o->system), o->point, Term{o->action, o->polynomial.translated(Integer(s)), o->observable}});
    }
    return make_estimate(sizes, orbit_levels(factors, sizes, start), tol);
  }

  const std::uint64_t span = static_cast<std::uint64_t>(start + std::max<std::int64_t>(0, *mx));
  const auto data = z.values(0, sizes.back() + span);
  std::vector<double> levels;
  CompensatedSum running;
  std::uint64_t done = 0;
  for (std::uint64_t n : sizes) {
    running.add(block_sum(done, n, 1, [&](std::uint64_t lo, std::uint64_t hi, CompensatedSum& acc) {
      for (std::uint64_t k = lo; k < hi; ++k) {
        double prod = 1.0;
        for (auto s : shifts) prod *= data[static_cast<std::size_t>(static_cast<std::int64_t>(k) + start + s)];
        acc.add(prod);
      }
    }));
    done = n;
    levels.push_back(running.value() / static_cast<double>(n));
  }
  return make_estimate(sizes, std::move(levels), tol);
}

std::vector<CorrelationCheck> admits_correlations(const SequenceSource& z,
                                                  const std::vector<std::vector<std::int64_t>>& shift_sets,
                                                  const NSchedule& schedule, double tol) {
  std::vector<CorrelationCheck> out;
  for (const auto& s : shift_sets) {
    CorrelationCheck c{s, seq_corr(z, s, schedule, tol)};
    c.pass = !c.estimate.residuals.empty() && c.estimate.residuals.back() <= tol;
    out.push_back(std::move(c));
  }
  return out;
}

double EmpiricalMeasure::frequency(std::size_t cell) const {
  return total == 0 ? 0.0 : static_cast<double>(counts.at(cell)) / static_cast<double>(total);
}

std::vector<double> EmpiricalMeasure::marginal(int c) const {
  if (c < 0 || c >= length) throw std::out_of_range("marginal coordinate");
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  std::size_t stride = 1;
  for (int k = 0; k < c; ++k) stride *= static_cast<std::size_t>(bins);
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    out[(cell / stride) % static_cast<std::size_t>(bins)] += static_cast<double>(counts[cell]);
  }
  for (auto& v : out) v /= static_cast<double>(total);
  return out;
}

double EmpiricalMeasure::product_residual() const {
  std::vector<std::vector<double>> marg;
  for (int c = 0; c < length; ++c) marg.push_back(marginal(c));
  double worst = 0.0;
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    double prod = 1.0;
    std::size_t rest = cell;
    for (int c = 0; c < length; ++c) {
      prod *= marg[static_cast<std::size_t>(c)][rest % static_cast<std::size_t>(bins)];
      rest /= static_cast<std::size_t>(bins);
    }
    worst = std::max(worst, std::abs(frequency(cell) - prod));
  }
  return worst;
}

int bin_of(double v, double lo, double hi, int bins) {
  if (hi <= lo) return 0;
  const double t = (v - lo) / (hi - lo) * bins;
  return std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
}

EmpiricalMeasure generic_cylinder(const SequenceSource& z, int length, int bins, std::uint64_t n,
                                  std::uint64_t offset) {
  if (length < 1 || bins < 1) throw std::invalid_argument("generic_cylinder needs L >= 1 and B >= 1");
  if (n == 0) throw std::invalid_argument("generic_cylinder needs N >= 1");
  double cells = std::pow(static_cast<double>(bins), length);
  if (cells > static_cast<double>(kMaxCells)) {
    throw BudgetExceeded("B^L = " + std::to_string(static_cast<std::uint64_t>(cells)) + " cells exceeds 10^6");
  }
  EmpiricalMeasure m;
  m.length = length;
  m.bins = bins;
  m.lo = z.lo();
  m.hi = z.hi();
  m.counts.assign(static_cast<std::size_t>(cells), 0);
  m.total = n;
  const auto data = z.values(offset, n + static_cast<std::uint64_t>(length) - 1);
  std::vector<int> binned(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) binned[k] = bin_of(data[k], m.lo, m.hi, bins);
  for (std::uint64_t k = 0; k < n; ++k) {
    std::size_t cell = 0;
    for (int c = length - 1; c >= 0; --c) cell = cell * static_cast<std::size_t>(bins) + binned[k + c];
    ++m.counts[cell];
  }
  return m;
}

namespace {

void multisets(int window, int size, int from, std::vector<std::int64_t>& cur,
               std::vector<std::vector<std::int64_t>>& out) {
  if (static_cast<int>(cur.size()) == size) {
    out.push_back(cur);
    return;
  }
  for (int v = from; v < window; ++v) {
    cur.push_back(v);
    multisets(window, size, v, cur, out);
    cur.pop_back();
  }
}

}  // namespace

StructureReport structure_test(const SequenceSource& z, const NSchedule& schedule, int s_max, int window,
                               double tol) {
  const auto* o = std::get_if<OrbitSequence>(&z.value());
  if (o == nullptr) throw std::invalid_argument("structure_test needs an orbit sequence");
  if (!o->system.is_weakly_mixing(o->action)) {
    throw std::invalid_argument("structure_test needs a weakly mixing action");
  }
  if (o->polynomial.degree() < 2) throw std::invalid_argument("structure_test needs deg p >= 2");

  StructureReport rep;
  rep.header = "checks factorization of correlations into moments of f; ergodicity of the "
               "Furstenberg system is not certified by a single orbit";
  std::vector<std::vector<std::int64_t>> tuples;
  for (int s = 1; s <= s_max; ++s) {
    std::vector<std::int64_t> cur;
    multisets(window, s, 0, cur, tuples);
  }
  for (const auto& t : tuples) {
    std::map<std::int64_t, int> mult;
    for (auto v : t) ++mult[v];
    double pred = 1.0;
    for (const auto& [shift, r] : mult) pred *= moment(o->system, o->observable, r);
    StructureCheck c;
    c.shifts = t;
    c.estimate = seq_corr(z, t, schedule).value;
    c.prediction = pred;
    c.residual = std::abs(c.estimate - pred);
    c.pass = c.residual <= tol;
    rep.pass = rep.pass && c.pass;
    rep.checks.push_back(std::move(c));
  }
  return rep;
}

}  // namespace polyjoin
