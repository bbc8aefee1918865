#include "polyjoin/summation.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace polyjoin {

namespace {

std::atomic<int> g_workers{0};

int env_workers() {
  if (const char* env = std::getenv("POLYJOIN_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

CompensatedSum reduce_range(const std::vector<CompensatedSum>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  CompensatedSum left = reduce_range(parts, lo, mid);
  left.add(reduce_range(parts, mid, hi));
  return left;
}

}  // namespace

int default_workers() {
  int w = g_workers.load();
  if (w <= 0) {
    w = env_workers();
    g_workers.store(w);
  }
  return w;
}

void set_default_workers(int workers) { g_workers.store(workers > 0 ? workers : 0); }

CompensatedSum tree_reduce(const std::vector<CompensatedSum>& parts) {
  if (parts.empty()) return {};
  return reduce_range(parts, 0, parts.size());
}

}  // namespace polyjoin
