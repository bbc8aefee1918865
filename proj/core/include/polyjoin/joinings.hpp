#pragma once

// Cylinder correlations of the polynomial joinings: for a family p_1..p_d
// and a grid of observables f_j^{(i)} (j in [-l, l]),
//   lim (1/N) sum_n int prod_{j,i} f_j^{(i)}(T^{p_i(n+j)} x) dmu(x),
// with Monte Carlo estimators and exact rational oracles on Z/m.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyjoin/averaging.hpp"
#include "polyjoin/dynamics.hpp"
#include "polyjoin/estimate.hpp"
#include "polyjoin/polynomial.hpp"

namespace polyjoin {

/// Grid slot (j, i): j in [-l, l], i a 0-based family index. Absent slots
/// are the constant 1.
using GridKey = std::pair<int, std::size_t>;

struct CylinderSpec {
  int l = 0;
  std::map<GridKey, Observable> grid;
  /// Action driving member i; empty means the main action for every member.
  std::vector<Action> actions;

  Action action_of(std::size_t i) const { return i < actions.size() ? actions[i] : Action::Main; }
};

/// One observable per leading linear member (i < s), plus a grid over the
/// remaining members.
struct SplitCylinderSpec {
  std::vector<Observable> linear;
  int l = 0;
  std::map<GridKey, Observable> grid;
};

/// Sample points: S derived-seed draws from mu, or every residue of Z/m.
struct Sampling {
  enum class Mode { Sampled, Enumerate };
  Mode mode = Mode::Sampled;
  std::size_t samples = 32;
  std::uint64_t seed = 1;

  static Sampling sampled(std::size_t s, std::uint64_t seed) { return {Mode::Sampled, s, seed}; }
  static Sampling enumerate() { return {Mode::Enumerate, 0, 0}; }
};

std::vector<Point> sample_points(const SystemSpec& sys, const Sampling& sampling);

/// Orbit terms of a cylinder, with polynomials already translated by j.
std::vector<Term> cylinder_terms(const PolynomialFamily& fam, const CylinderSpec& cyl);

/// Mean over the sample points of the Cesaro averages of prod of terms,
/// n over [start, start + N). std_error is the spread of per-point finals.
Estimate sampled_average(const SystemSpec& sys, const std::vector<Term>& terms, std::int64_t start,
                         const Sampling& sampling, const NSchedule& schedule, double tol = kDefaultTolerance);

/// Throws unless fam satisfies the spade condition or `waive_spade`.
Estimate cylinder_corr(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                       const Sampling& sampling, const NSchedule& schedule, bool waive_spade = false,
                       double tol = kDefaultTolerance);

inline constexpr std::uint64_t kExactPeriodCap = 10000000;
/// Bound on period * m, the number of (x, n) pairs the oracle visits.
inline constexpr std::uint64_t kExactWorkCap = 1000000000;

/// Exact period average of a term list on Z/m. Observables must be
/// indicators or constants.
Rational exact_term_average(const SystemSpec& sys, const std::vector<Term>& terms);

/// Joint period of the cylinder terms on Z/m.
std::uint64_t joint_period(const SystemSpec& sys, const std::vector<Term>& terms);

Rational cylinder_corr_exact(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl);

std::vector<Term> tilde_terms(const PolynomialFamily& fam, const SplitCylinderSpec& split);

Estimate tilde_cylinder_corr(const SystemSpec& sys, const PolynomialFamily& fam, const SplitCylinderSpec& split,
                             const Sampling& sampling, const NSchedule& schedule, bool waive_spade = false,
                             double tol = kDefaultTolerance);

Rational tilde_cylinder_corr_exact(const SystemSpec& sys, const PolynomialFamily& fam,
                                   const SplitCylinderSpec& split);

/// g(y) = prod_k f_k(T^{t_k} y).
struct ShiftedProduct {
  std::vector<std::pair<Integer, Observable>> factors;

  static ShiftedProduct single(Observable f) { return ShiftedProduct{{{Integer(0), std::move(f)}}}; }
};

/// int prod_i g_i(T^{a_i n} x) averaged over n: the Furstenberg self-joining
/// evaluated on g_1 x ... x g_d.
Estimate fj_corr(const SystemSpec& sys, const std::vector<Integer>& slopes,
                 const std::vector<ShiftedProduct>& components, const Sampling& sampling,
                 const NSchedule& schedule, double tol = kDefaultTolerance);

/// Exact version on Z/m: each component is tabulated over the residues,
/// then the tables are correlated along n -> a_i n.
Rational fj_corr_exact(const SystemSpec& sys, const std::vector<Integer>& slopes,
                       const std::vector<ShiftedProduct>& components);

struct VerifyReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  std::optional<double> std_error;
  bool exact = false;
  std::optional<Rational> lhs_exact;
  std::optional<Rational> rhs_exact;
  double tolerance = 0.0;
  bool pass = false;
};

/// d = 1, p(n) = n: the cylinder equals int prod_j f_j(T^j x) dmu.
/// `tol` defaults to 3 std_error on non-cyclic systems.
VerifyReport verify_identity_case(const SystemSpec& sys, const CylinderSpec& cyl, const Sampling& sampling = {},
                                  const NSchedule& schedule = {}, std::optional<double> tol = std::nullopt);

/// p_i(n) = a_i n: the cylinder equals the Furstenberg joining of the
/// shifted products prod_j f_j^{(i)} o T^{a_i j}.
VerifyReport verify_linear_case(const SystemSpec& sys, const std::vector<Integer>& slopes, const CylinderSpec& cyl,
                                const Sampling& sampling = {}, const NSchedule& schedule = {},
                                std::optional<double> tol = std::nullopt);

/// Weakly mixing action. Prediction: for the (at most one) linear member
/// with slope a, int prod_j f_j o T^{a j} dmu; times prod of integrals of
/// every nonlinear-member entry.
VerifyReport verify_wm_product(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                               const Sampling& sampling, const NSchedule& schedule, double tol = 0.03);

/// Single-orbit cylinder average, n over [l, l + N).
Estimate component_corr(const SystemSpec& sys, const PolynomialFamily& fam, const CylinderSpec& cyl,
                        const Point& x, const NSchedule& schedule, double tol = kDefaultTolerance);

/// Product of a nil-type system and a shift, acting coordinatewise.
struct ProductSystem {
  SystemSpec nil;
  SystemSpec shift;
};

struct ProductPoint {
  Point nil;
  Point shift;
};

struct ProductComponentsResult {
  Estimate joint;
  Estimate nil_part;
  double shift_factor = 0.0;
  double prediction = 0.0;
  double residual = 0.0;
  bool pass = false;
};

/// Joint orbit average of prod_{|j|<=l} h(T^{p(n+j)} z) g(S^{p(n+j)} w)
/// against [avg prod_j h(T^{p(n+j)} z)] (int g)^{2l+1}.
ProductComponentsResult verify_product_components(const ProductSystem& sys, const IntPolynomial& p, int l,
                                                  const Observable& h, const Observable& g,
                                                  const ProductPoint& x, const NSchedule& schedule,
                                                  double tol = 0.05);

}  // namespace polyjoin
