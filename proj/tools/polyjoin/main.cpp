#include <iostream>

#include <CLI11.hpp>

#include "polyjoin/runner.hpp"
#include "polyjoin/suite.hpp"
#include "polyjoin/systems.hpp"

int main(int argc, char** argv) {
  using namespace polyjoin::app;
  CLI::App app{"polyjoin: multiple ergodic averages and polynomial joinings"};
  app.require_subcommand(1);

  RunOptions run;
  run.workers = env_workers();
  auto* run_cmd = app.add_subcommand("run", "Run the scenarios of a config file");
  run_cmd->add_option("config", run.config, "Scenario file (YAML)")->required();
  run_cmd->add_option("--out", run.out, "Output root; results go to <out>/<run-id>/");
  run_cmd->add_option("--workers", run.workers, "Worker threads (default: $POLYJOIN_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--override-budget", run.override_budget, "Allow scenarios above the global caps");

  bool quick = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_flag("--quick", quick, "Skip the long criteria");

  auto* list_cmd = app.add_subcommand("list-systems", "Print systems, actions, observables and constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (*run_cmd) return run_command(run);
  if (*verify_cmd) {
    SuiteOptions opts;
    opts.quick = quick;
    return suite_exit_code(run_suite(opts, &std::cout));
  }
  if (*list_cmd) {
    std::cout << list_systems();
    return 0;
  }
  return kExitConfigError;
}
