#pragma once

// Per-step energy ledger: every term of the energy balance plus conservation
// and regularization diagnostics, evaluated with the solver's quadrature.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "eulergel/solver.hpp"
#include "eulergel/transport.hpp"

namespace eulergel {

struct EnergyLedger {
  double time = 0.0;
  double kinetic = 0.0;
  /// Regularized stored energy including the Yosida penalty energy.
  double stored = 0.0;
  double dissip_visc = 0.0;
  double dissip_diff = 0.0;
  double dissip_bdry = 0.0;
  /// Body-force power (gravity plus any verification source).
  double power_gravity = 0.0;
  double power_traction = 0.0;
  /// Boundary influx power plus any verification content source.
  double power_influx = 0.0;
  double mass_residual = 0.0;
  double min_detF = 0.0;
  double max_abs_F = 0.0;
  double z_overshoot = 0.0;
  double chi_active = 0.0;

  double total() const noexcept { return kinetic + stored; }
  double dissipation() const noexcept { return dissip_visc + dissip_diff + dissip_bdry; }
  double power() const noexcept { return power_gravity + power_traction + power_influx; }

  static const std::vector<std::string>& columns();
  std::vector<double> values() const;
};

EnergyLedger record(const Solver& solver, const FieldState& state);

/// R_n = E_n - E_0 + sum_{m<=n} dt_m (D_m - P_m), rates taken at the new level.
double balance_residual(const std::vector<EnergyLedger>& rows, std::size_t n);

struct RegularizationActivity {
  bool det_active = false;   // some det F < eps
  bool norm_active = false;  // some |F| > 1 / eps
  std::size_t det_count = 0;
  std::size_t norm_count = 0;

  bool active() const noexcept { return det_active || norm_active; }
};

RegularizationActivity regularization_activity(const TransportState& state, double eps);

/// CSV with the fixed column order and 17 significant digits.
void write_ledger_header(std::ostream& os);
void write_ledger_row(std::ostream& os, const EnergyLedger& row);
std::vector<EnergyLedger> read_ledger(std::istream& is);

}  // namespace eulergel
