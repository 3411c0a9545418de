#include "eulergel/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eulergel/errors.hpp"
#include "eulergel/snapshot.hpp"
#include "eulergel/version.hpp"

namespace eulergel {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// JSON cannot hold inf/nan; those become strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os = open_out(p);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed for '" + p.string() + "'");
}

json final_state_json(const FieldState& s) {
  auto vec = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
    return a;
  };
  json f = json::array(), rho = json::array();
  for (std::size_t n = 0; n < s.transport.size(); ++n) {
    const Tensor2& t = s.transport.f[n];
    json m = json::array();
    for (int i = 0; i < t.dim(); ++i)
      for (int j = 0; j < t.dim(); ++j) m.push_back(number(t(i, j)));
    f.push_back(m);
    rho.push_back(number(s.transport.rho[n]));
  }
  return json{{"time", s.time},      {"velocity", vec(s.v)}, {"content", vec(s.z)},
              {"potential", vec(s.mu)}, {"deformation", f},  {"density", rho}};
}

json summary_json(const RunSummary& s) {
  json j;
  j["steps"] = s.steps;
  j["final_time"] = number(s.final_time);
  j["min_detF"] = number(s.min_detF);
  j["max_mass_residual"] = number(s.max_mass_residual);
  j["max_z_overshoot"] = number(s.max_overshoot);
  j["balance_residual"] = number(s.balance_residual);
  j["energy_initial"] = s.ledger.empty() ? json(nullptr) : number(s.ledger.front().total());
  j["energy_final"] = s.ledger.empty() ? json(nullptr) : number(s.ledger.back().total());
  j["energy_monotone"] = s.energy_monotone;
  j["max_newton_iterations"] = s.max_newton_iterations;
  j["regularization_active_steps"] = s.regularization_active_steps;
  j["traction_normal_violation"] = number(s.traction_normal_violation);
  return j;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("EULERGEL_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunSummary run_scenario(const std::string& config_path, const RunOptions& options,
                        std::ostream& log) {
  RunSummary sum;
  const fs::path dir(options.output_dir);
  json manifest;
  manifest["code_version"] = kVersion;
  manifest["config_path"] = config_path;
  manifest["overrides"] = options.overrides;
  manifest["start_time"] = utc_now();

  auto fail = [&](int code, const std::string& status, const std::string& message) {
    sum.exit_code = code;
    sum.status = status;
    sum.message = message;
    log << "error: " << message << '\n';
  };

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    fail(exit_io_error, "io_error", "cannot create output directory '" + dir.string() + "': " + ec.message());
    return sum;
  }

  std::optional<Config> cfg;
  try {
    cfg = load_config(config_path, options.overrides);
  } catch (const ConfigError& e) {
    fail(exit_config_error, "config_error", e.what());
  } catch (const IoError& e) {
    fail(exit_io_error, "io_error", e.what());
  }

  if (cfg) {
    json resolved;
    for (const auto& [k, v] : cfg->resolved) resolved[k] = v;
    manifest["resolved_config"] = resolved;
    Scenario sc = cfg->scenario;
    if (options.until) sc.t_end = *options.until;
    const int snap_every = options.snapshot_every.value_or(cfg->output.snapshot_every);
    const int lattice = cfg->output.lattice;
    manifest["run"] = {{"t_end", sc.t_end}, {"snapshot_every", snap_every}};

    std::optional<Solver> solver;
    FieldState state;
    try {
      solver.emplace(sc);
      state = solver->initial_state();
      manifest["certificate"] = check_assumptions(sc.material).to_text();

      std::ofstream ledger = open_out(dir / "ledger.csv");
      std::ofstream steps = open_out(dir / "steps.csv");
      write_ledger_header(ledger);
      steps << "step,time,dt,substeps,halvings,diffusion_iterations,momentum_iterations\n";

      // Only the tangential traction is applied; report any normal part dropped.
      auto check_traction = [&](double t) {
        if (!sc.loads.traction || !solver->has_boundary()) return;
        double viol = 0.0;
        solver->boundary_traction(t, &viol);
        sum.traction_normal_violation = std::max(sum.traction_normal_violation, viol);
      };
      check_traction(state.time);

      sum.ledger.push_back(record(*solver, state));
      write_ledger_row(ledger, sum.ledger.back());
      if (snap_every > 0) export_fields(*solver, state, 0, dir.string(), lattice);
      if (regularization_activity(state.transport, sc.reg.epsilon).active())
        ++sum.regularization_active_steps;

      solver->integrate(state, sc.t_end, [&](const FieldState& s, const StepReport& rep) {
        ++sum.steps;
        check_traction(s.time);
        sum.ledger.push_back(record(*solver, s));
        write_ledger_row(ledger, sum.ledger.back());
        std::ostringstream line;
        line.precision(17);
        line << sum.steps << ',' << s.time << ',' << rep.dt << ',' << rep.substeps << ','
             << rep.halvings << ',' << rep.diffusion.iterations << ',' << rep.momentum.iterations;
        steps << line.str() << '\n';
        sum.max_newton_iterations =
            std::max({sum.max_newton_iterations, rep.diffusion.iterations, rep.momentum.iterations});
        if (regularization_activity(s.transport, sc.reg.epsilon).active())
          ++sum.regularization_active_steps;
        if (snap_every > 0 && sum.steps % static_cast<std::size_t>(snap_every) == 0)
          export_fields(*solver, s, sum.steps, dir.string(), lattice);
        if (!ledger || !steps) throw IoError("write failed in '" + dir.string() + "'");
      });
      if (sum.traction_normal_violation > 0.0)
        log << "warning: traction has a normal component (max " << sum.traction_normal_violation
            << "); only the tangential part was applied\n";
      log << "completed " << sum.steps << " steps, t = " << state.time << '\n';
    } catch (const LossOfPositivity& e) {
      fail(exit_solver_failure, "loss_of_positivity", e.what());
    } catch (const IoError& e) {
      fail(exit_io_error, "io_error", e.what());
    } catch (const ConfigError& e) {
      fail(exit_config_error, "config_error", e.what());
    } catch (const Error& e) {
      fail(exit_solver_failure, "solver_failure", e.what());
    }

    if (solver && sum.exit_code != exit_io_error) {
      try {
        // Final-state dump: the last accepted state, also after a failure.
        export_fields(*solver, state, sum.steps, dir.string(), lattice);
        write_json(dir / "final_state.json", final_state_json(state));
      } catch (const Error& e) {
        if (sum.exit_code == exit_ok) fail(exit_io_error, "io_error", e.what());
      }
    }
    sum.final_time = state.time;
  }

  if (!sum.ledger.empty()) {
    sum.min_detF = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < sum.ledger.size(); ++n) {
      const EnergyLedger& r = sum.ledger[n];
      sum.min_detF = std::min(sum.min_detF, r.min_detF);
      sum.max_mass_residual = std::max(sum.max_mass_residual, r.mass_residual);
      sum.max_overshoot = std::max(sum.max_overshoot, r.z_overshoot);
      if (n > 0 && r.total() > sum.ledger[n - 1].total()) sum.energy_monotone = false;
    }
    sum.balance_residual = std::abs(balance_residual(sum.ledger, sum.ledger.size() - 1));
  }

  manifest["end_time"] = utc_now();
  manifest["status"] = sum.status;
  manifest["exit_code"] = sum.exit_code;
  manifest["message"] = sum.message;
  manifest["summary"] = summary_json(sum);
  try {
    write_json(dir / "manifest.json", manifest);
  } catch (const IoError& e) {
    if (sum.exit_code == exit_ok) fail(exit_io_error, "io_error", e.what());
  }
  return sum;
}

double ledger_max_relative_delta(const std::vector<EnergyLedger>& a,
                                 const std::vector<EnergyLedger>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const auto va = a[n].values(), vb = b[n].values();
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double scale = std::max(std::abs(va[i]), std::abs(vb[i]));
      if (scale > 0.0) worst = std::max(worst, std::abs(va[i] - vb[i]) / scale);
    }
  }
  return worst;
}

int run_sweep(const std::string& config_path, const std::string& param,
              const std::vector<std::string>& values, const std::string& output_dir,
              std::ostream& log) {
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create output directory '" << dir.string() << "'\n";
    return exit_io_error;
  }
  json manifest;
  manifest["code_version"] = kVersion;
  manifest["config_path"] = config_path;
  manifest["parameter"] = param;
  manifest["values"] = values;
  manifest["start_time"] = utc_now();

  std::vector<std::string> keys;
  try {
    keys = sweep_keys(param);
    if (values.empty()) throw ConfigError("sweep.values", "no values given");
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    manifest["status"] = "config_error";
    manifest["message"] = e.what();
    manifest["end_time"] = utc_now();
    try {
      write_json(dir / "manifest.json", manifest);
    } catch (const IoError&) {
      return exit_io_error;
    }
    return exit_config_error;
  }

  std::vector<RunSummary> results(values.size());
  std::vector<std::string> logs(values.size());
  std::vector<std::string> subdirs(values.size());
  std::mutex mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (next >= values.size()) return;
        i = next++;
      }
      RunOptions opt;
      subdirs[i] = param + "_" + values[i];
      opt.output_dir = (dir / subdirs[i]).string();
      for (const auto& k : keys) opt.overrides[k] = values[i];
      std::ostringstream sub;
      results[i] = run_scenario(config_path, opt, sub);
      logs[i] = sub.str();
    }
  };
  const unsigned n_workers =
      std::min<unsigned>(worker_count(), static_cast<unsigned>(values.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = exit_ok;
  std::ofstream table;
  try {
    table = open_out(dir / "sweep.csv");
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return exit_io_error;
  }
  table << "value,status,steps,final_time,energy_initial,energy_final,balance_residual,"
           "max_z_overshoot,min_detF,max_mass_residual,ledger_delta_vs_first,"
           "balance_ratio_vs_prev,overshoot_ratio_vs_prev\n";
  json rows = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const RunSummary& r = results[i];
    log << "[" << subdirs[i] << "] " << r.status << (r.message.empty() ? "" : ": " + r.message)
        << '\n';
    if (code == exit_ok) code = r.exit_code;
    const double e0 = r.ledger.empty() ? 0.0 : r.ledger.front().total();
    const double e1 = r.ledger.empty() ? 0.0 : r.ledger.back().total();
    const double delta = ledger_max_relative_delta(results.front().ledger, r.ledger);
    auto ratio = [&](double prev, double cur) {
      return i == 0 || cur == 0.0 ? std::numeric_limits<double>::quiet_NaN() : prev / cur;
    };
    const double br = i ? ratio(results[i - 1].balance_residual, r.balance_residual) : NAN;
    const double orat = i ? ratio(results[i - 1].max_overshoot, r.max_overshoot) : NAN;
    std::ostringstream line;
    line.precision(17);
    line << values[i] << ',' << r.status << ',' << r.steps << ',' << r.final_time << ',' << e0
         << ',' << e1 << ',' << r.balance_residual << ',' << r.max_overshoot << ',' << r.min_detF
         << ',' << r.max_mass_residual << ',' << delta << ',' << br << ',' << orat;
    table << line.str() << '\n';
    json row = summary_json(r);
    row["value"] = values[i];
    row["status"] = r.status;
    row["ledger_delta_vs_first"] = number(delta);
    rows.push_back(row);
  }
  manifest["runs"] = rows;
  manifest["status"] = code == exit_ok ? "completed" : "failed";
  manifest["end_time"] = utc_now();
  try {
    write_json(dir / "manifest.json", manifest);
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return exit_io_error;
  }
  return code;
}

int check_material(const std::string& config_path, std::ostream& out) {
  try {
    const Config cfg = load_config(config_path);
    const AssumptionReport report = check_assumptions(cfg.scenario.material);
    out << report.to_text();
    return report.all_passed() ? exit_ok : 1;
  } catch (const ConfigError& e) {
    out << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const IoError& e) {
    out << "error: " << e.what() << '\n';
    return exit_io_error;
  }
}

}  // namespace eulergel
