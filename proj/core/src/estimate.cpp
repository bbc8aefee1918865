#include "polyjoin/estimate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "polyjoin/errors.hpp"

namespace polyjoin {

std::vector<std::uint64_t> NSchedule::sizes() const {
  validate();
  std::vector<std::uint64_t> out;
  std::uint64_t n = n0;
  for (std::uint32_t k = 0; k < levels; ++k) {
    out.push_back(n);
    n *= factor;
  }
  return out;
}

std::uint64_t NSchedule::max_n() const {
  long double n = static_cast<long double>(n0) * std::pow(static_cast<long double>(factor), levels - 1);
  if (n > 1.8e19L) return UINT64_MAX;
  std::uint64_t v = n0;
  for (std::uint32_t k = 1; k < levels; ++k) v *= factor;
  return v;
}

void NSchedule::validate(std::uint64_t budget) const {
  if (n0 == 0) throw std::invalid_argument("schedule N0 must be positive");
  if (factor < 2) throw std::invalid_argument("schedule factor must be >= 2");
  if (levels < 2) throw std::invalid_argument("schedule needs at least two levels");
  const std::uint64_t top = max_n();
  if (top > budget) {
    throw BudgetExceeded("schedule reaches N = " + std::to_string(top) + " above the budget " +
                         std::to_string(budget));
  }
}

NSchedule NSchedule::up_to(std::uint64_t n_max, std::uint32_t levels, std::uint32_t factor) {
  std::uint64_t div = 1;
  for (std::uint32_t k = 1; k < levels; ++k) div *= factor;
  if (n_max % div != 0 || n_max < div) {
    throw std::invalid_argument("N_max must be a positive multiple of factor^(levels-1)");
  }
  return NSchedule{n_max / div, factor, levels};
}

bool convergence_rule(const std::vector<double>& residuals, double tol) {
  if (residuals.empty()) return false;
  if (residuals.back() > tol) return false;
  // Below tol/10 the residuals sit at the fluctuation floor and need not
  // decrease.
  if (residuals.back() <= tol / 10.0) return true;
  if (residuals.size() >= 2 && residuals.back() > residuals[residuals.size() - 2]) return false;
  return true;
}

Estimate make_estimate(std::vector<std::uint64_t> sizes, std::vector<double> level_values, double tol,
                       std::optional<double> std_error) {
  Estimate e;
  e.sizes = std::move(sizes);
  e.level_values = std::move(level_values);
  for (std::size_t k = 1; k < e.level_values.size(); ++k) {
    e.residuals.push_back(std::abs(e.level_values[k] - e.level_values[k - 1]));
  }
  e.value = e.level_values.empty() ? 0.0 : e.level_values.back();
  e.std_error = std_error;
  e.converged = convergence_rule(e.residuals, tol);
  return e;
}

}  // namespace polyjoin
