#include "polyjoin/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/integer.hpp"
#include "polyjoin/prf.hpp"
#include "polyjoin/summation.hpp"

namespace polyjoin::app {

namespace {

ResultRecord run_one(const Scenario& s) {
  ResultRecord r;
  r.scenario_id = s.id;
  r.operation = s.operation;
  r.params_digest = hex64(fnv1a(s.canonical));
  r.engine_version = engine_version();
  r.constants_digest = constants_digest();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.outcome = s.run();
    r.status = r.outcome.ok ? "ok" : "fail";
  } catch (const std::exception& e) {
    r.status = "error";
    r.message = e.what();
    r.outcome = Outcome{};
    r.outcome.ok = false;
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int env_workers() {
  if (const char* v = std::getenv("POLYJOIN_WORKERS")) {
    try {
      const int k = std::stoi(v);
      if (k >= 1) return k;
    } catch (const std::exception&) {
    }
    std::cerr << "polyjoin: ignoring invalid POLYJOIN_WORKERS='" << v << "'\n";
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<ResultRecord> run_scenarios(const Config& cfg, int workers) {
  const std::size_t count = cfg.scenarios.size();
  std::vector<ResultRecord> out(count);
  if (count == 0) return out;
  workers = std::max(1, workers);
  // Engines reduce in fixed blocks, so splitting cores between scenarios and
  // engines never changes a result.
  const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  const int saved = default_workers();
  set_default_workers(std::max(1, workers / outer));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) out[i] = run_one(cfg.scenarios[i]);
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < outer; ++t) pool.emplace_back(drain);
  drain();
  pool.clear();
  set_default_workers(saved);
  return out;
}

std::string run_id(const std::filesystem::path& config, const std::string& text) {
  return config.stem().string() + "-" + hex64(fnv1a(text)).substr(0, 8);
}

int run_command(const RunOptions& opts) {
  std::string text;
  Config cfg;
  try {
    text = read_file(opts.config);
    cfg = parse_config(text, opts.override_budget);
  } catch (const ConfigError& e) {
    std::cerr << "polyjoin: config error: " << opts.config.string() << ": " << e.what() << "\n";
    return kExitConfigError;
  }

  const auto records = run_scenarios(cfg, opts.workers);
  const std::filesystem::path dir = opts.out / run_id(opts.config, text);
  std::filesystem::create_directories(dir);

  std::ofstream csv(dir / "results.csv", std::ios::binary);
  csv << kCsvHeader << "\n";
  std::ofstream jsonl(dir / "reports.jsonl", std::ios::binary);
  nlohmann::json timings = nlohmann::json::object();
  int failures = 0;
  for (const auto& r : records) {
    csv << csv_row(r) << "\n";
    jsonl << to_json(r).dump() << "\n";
    timings[r.scenario_id] = r.wall_seconds;
    if (r.status != "ok") ++failures;
    std::cout << r.scenario_id << " [" << r.operation << "] " << r.status;
    if (r.status == "error") {
      std::cout << ": " << r.message;
    } else {
      std::cout << " value=" << format_double(r.outcome.value);
    }
    std::cout << "\n";
  }

  nlohmann::json manifest = {
      {"engine_version", engine_version()},
      {"constants_digest", constants_digest()},
      {"prf",
       {{"seed_offset", hex64(kPublishedPrf.seed_offset)},
        {"lo_offset", hex64(kPublishedPrf.lo_offset)},
        {"hi_offset", hex64(kPublishedPrf.hi_offset)},
        {"mul1", hex64(kPublishedPrf.mul1)},
        {"mul2", hex64(kPublishedPrf.mul2)}}},
      {"alpha", {{"torus_128", to_hex(golden_alpha(128), 128)}, {"circle_256", to_hex(golden_alpha_256())}}},
      {"config", opts.config.string()},
      {"config_digest", hex64(fnv1a(text))},
      {"workers", opts.workers},
      {"scenarios", records.size()},
      {"failures", failures},
      {"wall_seconds", timings}};
  std::ofstream(dir / "manifest", std::ios::binary) << manifest.dump(2) << "\n";
  std::cout << "wrote " << dir.string() << " (" << records.size() << " scenarios, " << failures
            << " not ok)\n";
  return failures == 0 ? kExitOk : kExitScenarioFailure;
}

}  // namespace polyjoin::app
