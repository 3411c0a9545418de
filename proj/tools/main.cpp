#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eulergel/runner.hpp"
#include "eulergel/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Eulerian swelling-gel simulator"};
  app.set_version_flag("--version", std::string(eulergel::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  std::optional<double> until;
  std::optional<int> snapshot_every;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("-o,--output", out_dir, "Output directory");
  run->add_option("--until", until, "Override the end time");
  run->add_option("--snapshot-every", snapshot_every, "Snapshot interval in steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--set", sets, "Override a config key, e.g. time.dt=5e-4 (repeatable)");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run one sub-run per parameter value");
  sweep->add_option("config", config, "Scenario file")->required();
  sweep->add_option("--param", param, "epsilon, yosida_k, dt, degree or eps_F")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("-o,--output", out_dir, "Output directory");

  auto* check = app.add_subcommand("check-material", "Certify the material assumptions");
  check->add_option("config", config, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : eulergel::exit_config_error;
  }

  if (*run) {
    eulergel::RunOptions opt;
    opt.output_dir = out_dir;
    opt.until = until;
    opt.snapshot_every = snapshot_every;
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return eulergel::exit_config_error;
      }
      opt.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const auto summary = eulergel::run_scenario(config, opt, std::cerr);
    if (summary.exit_code == eulergel::exit_ok)
      std::cout << "status " << summary.status << ", steps " << summary.steps << ", t "
                << summary.final_time << ", output " << out_dir << '\n';
    return summary.exit_code;
  }
  if (*sweep) return eulergel::run_sweep(config, param, values, out_dir, std::cout);
  return eulergel::check_material(config, std::cout);
}
