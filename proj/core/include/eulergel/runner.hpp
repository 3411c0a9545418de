#pragma once

// Run orchestration behind the command-line tool: single runs, parameter
// sweeps and the material certificate. Every run directory receives a
// manifest.json, whether the run completed or not.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eulergel/audit.hpp"
#include "eulergel/config.hpp"

namespace eulergel {

enum ExitCode : int {
  exit_ok = 0,
  exit_solver_failure = 1,
  exit_config_error = 2,
  exit_io_error = 3,
};

struct RunOptions {
  std::string output_dir = "out";
  std::optional<double> until;
  std::optional<int> snapshot_every;
  Overrides overrides;
};

struct RunSummary {
  int exit_code = exit_ok;
  /// completed, solver_failure, loss_of_positivity, config_error or io_error.
  std::string status = "completed";
  std::string message;
  std::size_t steps = 0;
  double final_time = 0.0;
  std::vector<EnergyLedger> ledger;
  double min_detF = 0.0;
  double max_mass_residual = 0.0;
  double max_overshoot = 0.0;
  /// |R_n| at the final step.
  double balance_residual = 0.0;
  int max_newton_iterations = 0;
  std::size_t regularization_active_steps = 0;
  /// Largest |f . n| removed from the traction data.
  double traction_normal_violation = 0.0;
  bool energy_monotone = true;
};

/// Runs one scenario, writing ledger.csv, steps.csv, snapshots, the final
/// state and manifest.json into options.output_dir. Never throws.
RunSummary run_scenario(const std::string& config_path, const RunOptions& options,
                        std::ostream& log);

/// Largest relative difference |a - b| / max(|a|, |b|) over all ledger
/// entries; infinity when the row counts differ.
double ledger_max_relative_delta(const std::vector<EnergyLedger>& a,
                                 const std::vector<EnergyLedger>& b);

/// Sub-runs in <output_dir>/<param>_<value>, a sweep.csv comparison table
/// and a manifest. Sub-runs run on EULERGEL_WORKERS threads.
int run_sweep(const std::string& config_path, const std::string& param,
              const std::vector<std::string>& values, const std::string& output_dir,
              std::ostream& log);

/// Prints the certificate of the configured material; 0 when every check passes.
int check_material(const std::string& config_path, std::ostream& out);

/// EULERGEL_WORKERS, defaulting to the hardware concurrency.
unsigned worker_count();

}  // namespace eulergel
