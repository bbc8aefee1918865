#include "polyjoin/records.hpp"

#include <charconv>
#include <cmath>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/prf.hpp"

namespace polyjoin::app {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::string constants_digest() {
  const PrfConstants& c = kPublishedPrf;
  std::string text = "prf";
  for (auto v : {c.seed_offset, c.lo_offset, c.hi_offset, c.mul1, c.mul2}) text += ":" + hex64(v);
  text += "|torus128:" + to_hex(golden_alpha(128), 128);
  text += "|circle256:" + to_hex(golden_alpha_256());
  return hex64(fnv1a(text));
}

std::string engine_version() { return POLYJOIN_VERSION_STRING; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_back(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

bool operator==(const ResultRecord& a, const ResultRecord& b) {
  return a.scenario_id == b.scenario_id && a.operation == b.operation && a.params_digest == b.params_digest &&
         a.status == b.status && a.message == b.message && a.outcome.ok == b.outcome.ok &&
         a.outcome.n == b.outcome.n && a.outcome.value == b.outcome.value &&
         a.outcome.residual == b.outcome.residual && a.outcome.std_error == b.outcome.std_error &&
         a.outcome.converged == b.outcome.converged && a.outcome.detail == b.outcome.detail &&
         a.engine_version == b.engine_version && a.constants_digest == b.constants_digest &&
         a.wall_seconds == b.wall_seconds;
}

nlohmann::json to_json(const ResultRecord& r, bool with_wall_time) {
  nlohmann::json j;
  j["scenario_id"] = r.scenario_id;
  j["op"] = r.operation;
  j["params_digest"] = r.params_digest;
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["N"] = r.outcome.n;
  j["value"] = r.outcome.value;
  j["residual"] = opt(r.outcome.residual);
  j["stderr"] = opt(r.outcome.std_error);
  j["converged"] = r.outcome.converged;
  j["ok"] = r.outcome.ok;
  j["detail"] = r.outcome.detail;
  j["engine_version"] = r.engine_version;
  j["constants_digest"] = r.constants_digest;
  if (with_wall_time) j["wall_seconds"] = r.wall_seconds;
  return j;
}

ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.operation = j.at("op").get<std::string>();
  r.params_digest = j.at("params_digest").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.message = j.value("message", std::string());
  r.outcome.n = j.at("N").get<std::uint64_t>();
  r.outcome.value = j.at("value").get<double>();
  r.outcome.residual = opt_back(j.at("residual"));
  r.outcome.std_error = opt_back(j.at("stderr"));
  r.outcome.converged = j.at("converged").get<bool>();
  r.outcome.ok = j.at("ok").get<bool>();
  r.outcome.detail = j.at("detail");
  r.engine_version = j.at("engine_version").get<std::string>();
  r.constants_digest = j.at("constants_digest").get<std::string>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  return r;
}

std::string csv_row(const ResultRecord& r) {
  const Outcome& o = r.outcome;
  std::string s = r.scenario_id + "," + r.operation + ",";
  if (r.status == "error") return s + ",,,,false";
  s += std::to_string(o.n) + "," + format_double(o.value) + ",";
  if (o.residual) s += format_double(*o.residual);
  s += ",";
  if (o.std_error) s += format_double(*o.std_error);
  s += o.converged ? ",true" : ",false";
  return s;
}

nlohmann::json estimate_json(const Estimate& e) {
  nlohmann::json j;
  j["value"] = e.value;
  j["sizes"] = e.sizes;
  j["level_values"] = e.level_values;
  j["residuals"] = e.residuals;
  j["stderr"] = opt(e.std_error);
  j["converged"] = e.converged;
  return j;
}

std::string rational_string(const Rational& q) { return to_string(q); }

nlohmann::json report_json(const VerifyReport& r) {
  nlohmann::json j;
  j["identity"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["residual"] = r.residual;
  j["stderr"] = opt(r.std_error);
  j["exact"] = r.exact;
  if (r.lhs_exact) j["lhs_exact"] = rational_string(*r.lhs_exact);
  if (r.rhs_exact) j["rhs_exact"] = rational_string(*r.rhs_exact);
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

}  // namespace polyjoin::app
