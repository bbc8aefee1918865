#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace polyjoin {

inline constexpr double kDefaultTolerance = 0.02;

/// Cesaro lengths N0, N0 * factor, ..., N0 * factor^(levels - 1).
struct NSchedule {
  std::uint64_t n0 = 1000;
  std::uint32_t factor = 2;
  std::uint32_t levels = 8;

  std::vector<std::uint64_t> sizes() const;
  std::uint64_t max_n() const;
  /// Throws BudgetExceeded when max_n() > budget, invalid_argument on a
  /// malformed schedule.
  void validate(std::uint64_t budget = UINT64_MAX) const;

  static NSchedule up_to(std::uint64_t n_max, std::uint32_t levels, std::uint32_t factor = 2);
};

struct Estimate {
  double value = 0.0;
  std::vector<std::uint64_t> sizes;
  std::vector<double> level_values;
  /// |A_{N_{k+1}} - A_{N_k}|, one per consecutive pair of levels.
  std::vector<double> residuals;
  std::optional<double> std_error;
  bool converged = false;
};

/// Last residual <= tol, and no larger than the one before unless it is
/// already below tol / 10.
bool convergence_rule(const std::vector<double>& residuals, double tol);

Estimate make_estimate(std::vector<std::uint64_t> sizes, std::vector<double> level_values, double tol,
                       std::optional<double> std_error = std::nullopt);

}  // namespace polyjoin
