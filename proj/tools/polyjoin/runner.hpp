#pragma once

// Runs a scenario list and writes out/<run-id>/{results.csv, reports.jsonl,
// manifest}.

#include <filesystem>
#include <string>
#include <vector>

#include "polyjoin/config.hpp"
#include "polyjoin/records.hpp"

namespace polyjoin::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Runs every scenario, at most `workers` at a time; records come back in
/// declared order. An exception in one scenario becomes an "error" record.
std::vector<ResultRecord> run_scenarios(const Config& cfg, int workers);

/// "<config stem>-<first 8 hex digits of the config digest>".
std::string run_id(const std::filesystem::path& config, const std::string& text);

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  int workers = 1;
  bool override_budget = false;
};

/// Full `polyjoin run`; returns the process exit code.
int run_command(const RunOptions& opts);

/// Worker count from POLYJOIN_WORKERS, else the hardware concurrency.
int env_workers();

}  // namespace polyjoin::app
