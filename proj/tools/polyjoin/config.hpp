#pragma once

// Scenario files: a YAML document with an optional `budget` block, an
// optional shared `observables` library and a `scenarios` list. Every
// scenario is fully resolved at load time, so reference and budget errors
// surface before anything runs. See docs/scenarios.md for the schema.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace polyjoin::app {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, int line = 0, int column = 0);
  int line;
  int column;
};

/// Global caps; exceeding one is a config error unless overridden.
struct Caps {
  std::uint64_t max_n = 100'000'000;
  /// H^(k-1) * N for seminorm and sequence-norm scenarios.
  double max_seminorm_work = 1e10;
  /// B^L for empirical measures.
  std::uint64_t max_cells = 1'000'000;
};

struct Outcome {
  /// false: a verification or check did not hold (status "fail").
  bool ok = true;
  std::uint64_t n = 0;
  double value = 0.0;
  std::optional<double> residual;
  std::optional<double> std_error;
  bool converged = false;
  nlohmann::json detail = nlohmann::json::object();
};

struct Scenario {
  std::string id;
  std::string operation;
  /// Canonical JSON of the scenario node (sorted keys).
  std::string canonical;
  int line = 0;
  std::function<Outcome()> run;
};

struct Config {
  Caps caps;
  std::vector<Scenario> scenarios;
};

inline const std::vector<std::string>& operations() {
  static const std::vector<std::string> ops{
      "average", "l2profile", "seminorm",        "seqnorm",       "joining",   "tilde",     "component",
      "sequence", "recurrence", "weighted", "verify-identity", "verify-linear", "verify-wm", "verify-product"};
  return ops;
}

Config parse_config(const std::string& text, bool override_budget = false);
Config load_config(const std::string& path, bool override_budget = false);

}  // namespace polyjoin::app
