#pragma once

// The acceptance suite behind `polyjoin verify`: criteria 1..14 plus a PRF
// golden-vector gate (criterion 0) that the bit-stream criteria depend on.

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "polyjoin/prf.hpp"

namespace polyjoin::app {

struct CriterionResult {
  int id = 0;
  std::string title;
  std::string status;  // pass | fail | skip
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct SuiteOptions {
  /// Skip the long criteria (3, 5, 9, 10, 14).
  bool quick = false;
  /// Constants used by every bit-stream system; corrupting them is the
  /// negative control.
  PrfConstants prf = kPublishedPrf;
  /// Restrict to these criteria; empty runs all.
  std::set<int> only;
};

inline const std::set<int>& quick_skipped() {
  static const std::set<int> s{3, 5, 9, 10, 14};
  return s;
}

/// Runs the suite, printing one line per criterion to `out` if non-null.
std::vector<CriterionResult> run_suite(const SuiteOptions& opts, std::ostream* out = nullptr);

/// 0 iff no criterion failed.
int suite_exit_code(const std::vector<CriterionResult>& results);

}  // namespace polyjoin::app
