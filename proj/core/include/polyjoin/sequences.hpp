#pragma once

// Bounded real sequences z : N -> I, their correlations and coarse
// empirical measures (the data determining a Furstenberg system).

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/estimate.hpp"
#include "polyjoin/polynomial.hpp"

namespace polyjoin {

/// z(n) = f(T_action^{p(n)} x).
struct OrbitSequence {
  SystemSpec system;
  Action action = Action::Main;
  Point point;
  IntPolynomial polynomial;
  Observable observable;
};

struct ExplicitSequence {
  std::vector<double> values;
  double lo = -1.0;
  double hi = 1.0;
};

class SequenceSource {
 public:
  SequenceSource(OrbitSequence s);
  SequenceSource(ExplicitSequence s);

  static SequenceSource constant(double c, std::size_t length);

  const std::variant<OrbitSequence, ExplicitSequence>& value() const { return v_; }
  bool is_orbit() const { return std::holds_alternative<OrbitSequence>(v_); }
  /// Declared range I = [lo, hi].
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double bound() const;
  /// Available length; unlimited for orbit sequences.
  std::uint64_t length() const;

  /// z(begin), ..., z(begin + count - 1).
  std::vector<double> values(std::uint64_t begin, std::uint64_t count) const;

 private:
  std::variant<OrbitSequence, ExplicitSequence> v_;
  double lo_ = -1.0;
  double hi_ = 1.0;
};

/// Range [lo, hi] of an observable's values.
std::pair<double, double> observable_range(const Observable& f);

/// (1/N) sum_{n<N} prod_j z(n + n_j), n starting at max(0, -min n_j).
Estimate seq_corr(const SequenceSource& z, const std::vector<std::int64_t>& shifts, const NSchedule& schedule,
                  double tol = kDefaultTolerance);

struct CorrelationCheck {
  std::vector<std::int64_t> shifts;
  Estimate estimate;
  bool pass = false;
};

std::vector<CorrelationCheck> admits_correlations(const SequenceSource& z,
                                                  const std::vector<std::vector<std::int64_t>>& shift_sets,
                                                  const NSchedule& schedule, double tol = kDefaultTolerance);

/// Frequencies of length-L words of bin indices (B equal-width bins over I)
/// read at coordinates [offset, offset + L) of the shifted sequences.
struct EmpiricalMeasure {
  int length = 0;
  int bins = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;  // cell index = sum_c bin_c B^c
  std::uint64_t total = 0;

  double frequency(std::size_t cell) const;
  /// Distribution of the bin at coordinate c.
  std::vector<double> marginal(int c) const;
  /// max over cells |mass - product of coordinate marginals|.
  double product_residual() const;
};

inline constexpr std::uint64_t kMaxCells = 1000000;

int bin_of(double v, double lo, double hi, int bins);

EmpiricalMeasure generic_cylinder(const SequenceSource& z, int length, int bins, std::uint64_t n,
                                  std::uint64_t offset = 0);

struct StructureCheck {
  std::vector<std::int64_t> shifts;
  double estimate = 0.0;
  double prediction = 0.0;
  double residual = 0.0;
  bool pass = false;
};

struct StructureReport {
  /// One orbit cannot certify ergodicity of its Furstenberg system; only
  /// the factorization of correlations into moments is checked.
  std::string header;
  std::vector<StructureCheck> checks;
  bool pass = true;
};

/// Every multiset of shifts from {0, ..., window - 1} of size <= s_max is
/// compared with prod over distinct shifts of moment_{multiplicity}(f).
StructureReport structure_test(const SequenceSource& z, const NSchedule& schedule, int s_max = 3,
                               int window = 3, double tol = 0.04);

}  // namespace polyjoin
