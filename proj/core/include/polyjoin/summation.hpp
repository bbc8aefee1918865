#pragma once

// Deterministic summation. Index ranges are cut into blocks at absolute
// multiples of kBlockSize; each block is summed with Neumaier compensation
// and block sums are combined by a fixed pairwise tree. The result depends
// only on the range, never on the worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polyjoin {

class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr std::uint64_t kBlockSize = 4096;

/// Worker count from POLYJOIN_WORKERS, else hardware concurrency.
int default_workers();
void set_default_workers(int workers);

/// Calls fn(i) for i in [0, count) across up to `workers` threads. The first
/// exception thrown by any call is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise reduction in index order.
CompensatedSum tree_reduce(const std::vector<CompensatedSum>& parts);

/// Sums fill(lo, hi, acc) over absolute blocks covering [begin, end). `fill`
/// must add the terms for indices [lo, hi) to `acc` in increasing order.
template <class Fill>
CompensatedSum block_sum(std::uint64_t begin, std::uint64_t end, int workers, Fill&& fill) {
  if (end <= begin) return {};
  const std::uint64_t first = begin / kBlockSize;
  const std::uint64_t last = (end - 1) / kBlockSize;
  std::vector<CompensatedSum> parts(static_cast<std::size_t>(last - first + 1));
  parallel_for(parts.size(), workers, [&](std::size_t k) {
    const std::uint64_t b = first + k;
    const std::uint64_t lo = std::max(begin, b * kBlockSize);
    const std::uint64_t hi = std::min(end, (b + 1) * kBlockSize);
    fill(lo, hi, parts[k]);
  });
  return tree_reduce(parts);
}

}  // namespace polyjoin
