#pragma once

// Cesaro averages of products of observables along polynomial orbits,
// computed over the Folner sets [start, start + N).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/estimate.hpp"
#include "polyjoin/polynomial.hpp"
#include "polyjoin/summation.hpp"

namespace polyjoin {

/// One factor f(T_action^{p(n)} x) of a multiple average.
struct Term {
  Action action = Action::Main;
  IntPolynomial polynomial;
  Observable observable;
};

/// A term bound to its own system and starting point; lets one average mix
/// orbits of different systems (nilsequence weights, product systems).
struct OrbitFactor {
  std::reference_wrapper<const SystemSpec> system;
  Point point;
  Term term;
};

std::vector<OrbitFactor> bind_terms(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms);

/// Sum of prod_i f_i(T_i^{p_i(n)} x_i) over n in [start + lo, start + hi).
CompensatedSum orbit_product_sum(const std::vector<OrbitFactor>& factors, std::int64_t start, std::uint64_t lo,
                                 std::uint64_t hi, int workers = default_workers());

/// Cesaro averages at every size in `sizes` (increasing), extending the
/// running sum from one size to the next.
std::vector<double> orbit_levels(const std::vector<OrbitFactor>& factors, const std::vector<std::uint64_t>& sizes,
                                 std::int64_t start = 0, int workers = default_workers());

double finite_multiple_average(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms,
                               std::uint64_t n);

Estimate limit_multiple_average(const SystemSpec& sys, const Point& x, const std::vector<Term>& terms,
                                const NSchedule& schedule, double tol = kDefaultTolerance);

struct L2Profile {
  std::vector<std::uint64_t> sizes;
  /// rms over samples of A_{N_{k+1}}(x) - A_{N_k}(x); one per level pair.
  std::vector<double> rms;
  /// Last-level average for each sample point.
  std::vector<double> final_values;
  double mean_final = 0.0;
};

L2Profile l2_profile(const SystemSpec& sys, const std::vector<Term>& terms, const NSchedule& schedule,
                     std::size_t samples, std::uint64_t seed);

struct RecurrenceResult {
  Estimate estimate;
  Rational exact;
  std::uint64_t period = 0;
};

/// (1/N) sum_n mu(A ∩ T^{-p_1(n)} A ∩ ... ∩ T^{-p_d(n)} A) on a cyclic
/// system, with the exact limit over one joint period.
RecurrenceResult recurrence_average(const SystemSpec& sys, const Observable& set, const PolynomialFamily& fam,
                                    const NSchedule& schedule);

/// Weight phi_n = g(S^{q(n)} y) from a second (typically skew-product)
/// system.
struct NilWeight {
  SystemSpec system;
  Point point;
  Observable observable;
  IntPolynomial polynomial;
};

Estimate weighted_average(const SystemSpec& sys, const Point& x, const NilWeight& weight,
                          const std::vector<Term>& terms, const NSchedule& schedule,
                          double tol = kDefaultTolerance);

struct VdcResult {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = |mean|^2; rhs = (1/H) sum_{h=1..H} |mean over the overlap of
/// zeta_n zeta_{n+h}|.
VdcResult vdc_check(std::span<const double> values, std::size_t h_max);

/// Finite-size allowance 4 sup^2 (H/N + 1/H).
double vdc_slack(std::size_t n, std::size_t h_max, double sup_norm);

}  // namespace polyjoin
