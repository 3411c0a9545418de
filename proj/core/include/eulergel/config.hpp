#pragma once

// Scenario files: YAML with sections domain, spaces, material,
// regularization, loads, initial, time, output. Unknown keys are rejected
// with a ConfigError naming the dotted key ("material.nu"). Loads and
// initial data are expression strings in t, x, y, z.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eulergel/solver.hpp"

namespace eulergel {

struct OutputOptions {
  int snapshot_every = 0;  // 0 disables periodic snapshots
  int lattice = 65;
};

struct Config {
  Scenario scenario;
  OutputOptions output;
  /// Every key with its effective value (defaults included), in file order.
  std::vector<std::pair<std::string, std::string>> resolved;
};

/// Dotted-key overrides applied before validation, e.g. {"time.dt", "5e-4"}.
using Overrides = std::map<std::string, std::string>;

Config parse_config(const std::string& yaml_text, const Overrides& overrides = {});
/// Throws IoError if the file cannot be read.
Config load_config(const std::string& path, const Overrides& overrides = {});

/// Maps a sweep parameter name (epsilon, yosida_k, dt, degree, eps_F) to the
/// dotted keys it sets. Throws ConfigError for unknown names.
std::vector<std::string> sweep_keys(const std::string& param);

}  // namespace eulergel
