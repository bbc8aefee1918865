// Runs criteria 1..14 (plus the PRF gate) and prints one line per criterion.

#include <iostream>

#include "polyjoin/suite.hpp"

int main() {
  using namespace polyjoin::app;
  const auto results = run_suite(SuiteOptions{}, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.status == "fail" ? 1 : 0;
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return suite_exit_code(results);
}
