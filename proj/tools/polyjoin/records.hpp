#pragma once

// Result records and their serializations (CSV row, JSON line).

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "polyjoin/config.hpp"
#include "polyjoin/estimate.hpp"
#include "polyjoin/integer.hpp"
#include "polyjoin/joinings.hpp"

namespace polyjoin::app {

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

/// Digest of the published PRF and rotation constants.
std::string constants_digest();
std::string engine_version();

struct ResultRecord {
  std::string scenario_id;
  std::string operation;
  std::string params_digest;
  std::string status;  // ok | fail | error
  std::string message;
  Outcome outcome;
  std::string engine_version;
  std::string constants_digest;
  /// Kept out of reports.jsonl so reruns are byte-identical; written to the
  /// manifest instead.
  double wall_seconds = 0.0;

  friend bool operator==(const ResultRecord& a, const ResultRecord& b);
};

nlohmann::json to_json(const ResultRecord& r, bool with_wall_time = false);
ResultRecord record_from_json(const nlohmann::json& j);

inline constexpr const char* kCsvHeader = "scenario_id,op,N,value,residual,stderr,converged";
std::string csv_row(const ResultRecord& r);

/// Shortest round-trip decimal form.
std::string format_double(double v);

nlohmann::json estimate_json(const Estimate& e);
nlohmann::json report_json(const VerifyReport& r);
std::string rational_string(const Rational& q);

}  // namespace polyjoin::app
