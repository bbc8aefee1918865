#pragma once

// Host-Kra seminorms of observables, estimated through the recursion
// |||f|||_{k+1}^{2^{k+1}} = lim_H avg_h |||f . T^h f|||_k^{2^k}, and the
// uniformity norms of bounded sequences.

#include <cstdint>
#include <vector>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/estimate.hpp"
#include "polyjoin/sequences.hpp"

namespace polyjoin {

struct SeminormBudget {
  std::uint64_t H = 512;
  std::uint64_t N = 65536;
  int k_max = 3;
  /// Seed of the base point of the Birkhoff averages.
  std::uint64_t seed = 0x5eed;
  /// Use closed-form integrals for the innermost |||.|||_1 when the product
  /// observable has one; otherwise Birkhoff means along the orbit.
  bool exact_base = true;
};

/// Values above this (in magnitude) that come out negative before an even
/// root are an estimator failure rather than rounding.
inline constexpr double kClampThreshold = 1e-9;

/// Even root of a quantity that is nonnegative in the limit.
double clamped_root(double power, int exponent);

/// The finite estimate of |||f|||_k^{2^k}: for k >= 2,
///   H^{-(k-1)} sum_{h in [1,H]^{k-1}} ((1/N) sum_{n<N} prod_eps a(n + eps.h))^2
/// with a(m) = f(T^m x); the innermost average over h_k of the cube
/// correlations is |||.|||_1^2 of the (k-1)-cube product. For k = 1 this is
/// the squared mean.
double hk_power(const std::vector<double>& orbit, int k, std::uint64_t h, std::uint64_t n);

/// Estimate across budgets (H/2, N/2) and (H, N); the residual is the change
/// in the seminorm value.
Estimate hk_seminorm(const SystemSpec& sys, const Observable& f, int k, const SeminormBudget& budget = {},
                     double tol = kDefaultTolerance);

/// c_h = (1/N) sum_n prod_{eps in {0,1}^k} a(n + eps.h).
double seq_correlation(const SequenceSource& a, std::uint64_t n, const std::vector<std::int64_t>& h);

/// Uniformity norm of a sequence, with the last shift average taken as the
/// squared mean: (avg_{h in [1,H]^{k-1}} (mean_n prod_eps a(n + eps.h))^2)^{1/2^k}.
double seq_norm(const SequenceSource& a, int k, std::uint64_t h, std::uint64_t n);

}  // namespace polyjoin
