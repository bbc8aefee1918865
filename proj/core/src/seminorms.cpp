#include "polyjoin/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "polyjoin/errors.hpp"
#include "polyjoin/summation.hpp"

namespace polyjoin {

double clamped_root(double power, int exponent) {
  if (power < 0.0) {
    if (power < -kClampThreshold) {
      throw EstimatorFailure("negative estimate " + std::to_string(power) + " before the " +
                             std::to_string(exponent) + "-th root; increase the budget");
    }
    power = 0.0;
  }
  return std::pow(power, 1.0 / exponent);
}

namespace {

// (1/N) sum_{n<N} b[n] * b[n + h], summed in fixed blocks.
double lag_mean(const double* b, std::uint64_t h, std::uint64_t n) {
  CompensatedSum total;
  for (std::uint64_t lo = 0; lo < n; lo += kBlockSize) {
    const std::uint64_t hi = std::min(n, lo + kBlockSize);
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::uint64_t k = lo;
    for (; k + 4 <= hi; k += 4) {
      acc[0] += b[k] * b[k + h];
      acc[1] += b[k + 1] * b[k + 1 + h];
      acc[2] += b[k + 2] * b[k + 2 + h];
      acc[3] += b[k + 3] * b[k + 3 + h];
    }
    for (; k < hi; ++k) acc[0] += b[k] * b[k + h];
    total.add((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
  return total.value() / static_cast<double>(n);
}

// Sum over h in [1,H]^depth of (mean_{n<N} prod_eps b(n + eps.h))^2.
double cube_sum(const std::vector<double>& b, int depth, std::uint64_t H, std::uint64_t n, int workers) {
  std::vector<double> parts(H, 0.0);
  parallel_for(H, workers, [&](std::size_t k) {
    const std::uint64_t h = k + 1;
    if (depth == 1) {
      const double m = lag_mean(b.data(), h, n);
      parts[k] = m * m;
      return;
    }
    const std::size_t len = b.size() - H;
    std::vector<double> next(len);
    for (std::size_t i = 0; i < len; ++i) next[i] = b[i] * b[i + h];
    parts[k] = cube_sum(next, depth - 1, H, n, 1);
  });
  CompensatedSum total;
  for (double p : parts) total.add(p);
  return total.value();
}

double plain_mean(const std::vector<double>& b, std::uint64_t n) {
  CompensatedSum s;
  for (std::uint64_t k = 0; k < n; ++k) s.add(b[k]);
  return s.value() / static_cast<double>(n);
}

// Same average with the inner means replaced by exact integrals.
std::optional<double> exact_power(const SystemSpec& sys, const Observable& f, int k, std::uint64_t H) {
  const int depth = k - 1;
  if (!shifted_product_integral(sys, f, {Integer(0), Integer(1)})) return std::nullopt;
  std::uint64_t tuples = 1;
  for (int d = 1; d < depth; ++d) tuples *= H;
  std::vector<double> parts(H, 0.0);
  parallel_for(H, default_workers(), [&](std::size_t first) {
    CompensatedSum acc;
    std::vector<std::uint64_t> h(static_cast<std::size_t>(depth), 1);
    h[0] = first + 1;
    std::vector<Integer> shifts(std::size_t{1} << depth);
    for (std::uint64_t t = 0; t < tuples; ++t) {
      std::uint64_t rest = t;
      for (int d = 1; d < depth; ++d) {
        h[static_cast<std::size_t>(d)] = rest % H + 1;
        rest /= H;
      }
      for (std::size_t e = 0; e < shifts.size(); ++e) {
        std::uint64_t s = 0;
        for (int d = 0; d < depth; ++d) {
          if ((e >> d) & 1) s += h[static_cast<std::size_t>(d)];
        }
        shifts[e] = Integer(s);
      }
      const double v = *shifted_product_integral(sys, f, shifts);
      acc.add(v * v);
    }
    parts[first] = acc.value();
  });
  CompensatedSum total;
  for (double p : parts) total.add(p);
  return total.value() / std::pow(static_cast<double>(H), depth);
}

}  // namespace

double hk_power(const std::vector<double>& orbit, int k, std::uint64_t h, std::uint64_t n) {
  if (k < 1) throw std::invalid_argument("seminorm order must be >= 1");
  if (h < 1 || n < 1) throw std::invalid_argument("seminorm budget needs H >= 1 and N >= 1");
  if (orbit.size() < n + static_cast<std::uint64_t>(k - 1) * h) {
    throw std::invalid_argument("orbit too short for the seminorm budget");
  }
  if (k == 1) {
    const double m = plain_mean(orbit, n);
    return m * m;
  }
  return cube_sum(orbit, k - 1, h, n, default_workers()) / std::pow(static_cast<double>(h), k - 1);
}

Estimate hk_seminorm(const SystemSpec& sys, const Observable& f, int k, const SeminormBudget& budget, double tol) {
  if (!sys.is_ergodic()) throw NotErgodic(sys.describe() + " is not ergodic");
  if (k < 1 || k > budget.k_max) {
    throw std::invalid_argument("seminorm order " + std::to_string(k) + " outside [1, " +
                                std::to_string(budget.k_max) + "]");
  }
  if (budget.H < 2 || budget.N < 2) throw std::invalid_argument("seminorm budget needs H >= 2 and N >= 2");
  check_observable(sys, f);
  const std::vector<std::uint64_t> sizes{budget.N / 2, budget.N};
  const int exponent = 1 << k;
  if (k == 1) {
    const IntegralValue iv = integral(sys, f);
    if (iv.exact) {
      const double v = std::abs(iv.value);
      return make_estimate(sizes, {v, v}, tol);
    }
  } else if (budget.exact_base) {
    if (auto half = exact_power(sys, f, k, budget.H / 2)) {
      const double full = *exact_power(sys, f, k, budget.H);
      return make_estimate(sizes, {clamped_root(*half, exponent), clamped_root(full, exponent)}, tol);
    }
  }
  const Point x = sample(sys, budget.seed);
  const std::uint64_t len = budget.N + static_cast<std::uint64_t>(k - 1) * budget.H;
  const SequenceSource orbit(OrbitSequence{sys, Action::Main, x, IntPolynomial::linear(1), f});
  const auto a = orbit.values(0, len);
  std::vector<double> levels{clamped_root(hk_power(a, k, budget.H / 2, budget.N / 2), exponent),
                             clamped_root(hk_power(a, k, budget.H, budget.N), exponent)};
  return make_estimate(sizes, std::move(levels), tol);
}

double seq_correlation(const SequenceSource& a, std::uint64_t n, const std::vector<std::int64_t>& h) {
  if (h.empty() || h.size() > 20) throw std::invalid_argument("seq_correlation needs 1..20 shifts");
  if (n == 0) throw std::invalid_argument("seq_correlation needs N >= 1");
  for (auto v : h) {
    if (static_cast<double>(std::abs(v)) > static_cast<double>(n) / 10.0) {
      throw std::invalid_argument("shift " + std::to_string(v) + " exceeds N/10");
    }
  }
  const std::size_t vertices = std::size_t{1} << h.size();
  std::vector<std::int64_t> offsets(vertices, 0);
  for (std::size_t e = 0; e < vertices; ++e) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if ((e >> i) & 1) offsets[e] += h[i];
    }
  }
  const std::int64_t mn = *std::min_element(offsets.begin(), offsets.end());
  const std::int64_t mx = *std::max_element(offsets.begin(), offsets.end());
  const std::int64_t start = std::max<std::int64_t>(0, -mn);
  const auto data = a.values(0, static_cast<std::uint64_t>(start + mx) + n);
  CompensatedSum s;
  for (std::uint64_t k = 0; k < n; ++k) {
    double prod = 1.0;
    for (auto o : offsets) prod *= data[static_cast<std::size_t>(static_cast<std::int64_t>(k) + start + o)];
    s.add(prod);
  }
  return s.value() / static_cast<double>(n);
}

double seq_norm(const SequenceSource& a, int k, std::uint64_t h, std::uint64_t n) {
  if (k < 2 || k > 20) throw std::invalid_argument("seq_norm order must be in [2, 20]");
  if (h < 1 || n < 1) throw std::invalid_argument("seq_norm needs H >= 1 and N >= 1");
  const auto data = a.values(0, n + static_cast<std::uint64_t>(k - 1) * h);
  return clamped_root(hk_power(data, k, h, n), 1 << k);
}

}  // namespace polyjoin
