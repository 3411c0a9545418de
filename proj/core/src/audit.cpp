#include "eulergel/audit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "eulergel/errors.hpp"
#include "eulergel/material.hpp"

namespace eulergel {

const std::vector<std::string>& EnergyLedger::columns() {
  static const std::vector<std::string> cols = {
      "time",          "kinetic",        "stored",         "dissip_visc",  "dissip_diff",
      "dissip_bdry",   "power_gravity",  "power_traction", "power_influx", "mass_residual",
      "min_detF",      "max_abs_F",      "z_overshoot",    "chi_active"};
  return cols;
}

std::vector<double> EnergyLedger::values() const {
  return {time,          kinetic,        stored,       dissip_visc,   dissip_diff,
          dissip_bdry,   power_gravity,  power_traction, power_influx, mass_residual,
          min_detF,      max_abs_F,      z_overshoot,  chi_active};
}

EnergyLedger record(const Solver& solver, const FieldState& state) {
  const Scenario& sc = solver.scenario();
  const MaterialModel& mat = sc.material;
  const QuadGrid& grid = solver.grid();
  const int d = sc.box.dim;
  const auto nn = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd& w = grid.weights();
  const VelocityTables& vt = solver.velocity_tables();
  const SpaceTables& zt = solver.scalar_tables();
  const TransportState& ts = state.transport;
  const double t = state.time;

  EnergyLedger row;
  row.time = t;

  std::vector<Eigen::VectorXd> v, grad, grad_e, gmu;
  for (const auto& m : vt.value) v.push_back(m * state.v);
  for (const auto& m : vt.grad) grad.push_back(m * state.v);
  for (const auto& m : vt.grad_e) grad_e.push_back(m * state.v);
  for (const auto& m : zt.grad) gmu.push_back(m * state.mu);
  const Eigen::VectorXd z = zt.value * state.z;
  const Eigen::VectorXd mu = zt.value * state.mu;

  std::size_t chi_below = 0;
  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const Tensor2& f = ts.f[un];
    const Vec& x = grid.points()[un];
    Vec vn(d);
    Tensor2 gv(d);
    for (int i = 0; i < d; ++i) {
      vn[i] = v[static_cast<std::size_t>(i)](n);
      for (int j = 0; j < d; ++j) gv(i, j) = grad[static_cast<std::size_t>(i * d + j)](n);
    }
    row.kinetic += w(n) * 0.5 * ts.rho[un] * vn.dot(vn);

    const RegularizedResponse rr = regularized_response(mat, f, z(n), sc.reg, false);
    row.stored += w(n) * (rr.energy + yosida_energy(z(n), sc.reg.yosida_k));
    if (rr.chi < 1.0) ++chi_below;

    const Tensor2 e = sym(gv);
    double he2 = 0.0;
    for (const auto& g : grad_e) he2 += g(n) * g(n);
    double visc = viscous_stress(mat, z(n), e).ddot(e);
    if (mat.dissipation.nu != 0.0) visc += mat.dissipation.nu * std::pow(std::sqrt(he2), mat.dissipation.p);
    row.dissip_visc += w(n) * visc;

    double g2 = 0.0;
    for (const auto& g : gmu) g2 += g(n) * g(n);
    row.dissip_diff += w(n) * mobility_hat(mat, f, z(n)) * g2;

    Vec force(d);
    if (sc.loads.gravity)
      force += (ts.rho_r[un] / det_floor(f, sc.reg.epsilon)) * sc.loads.gravity(t, x);
    if (sc.loads.momentum_source) force += sc.loads.momentum_source(t, x);
    row.power_gravity += w(n) * force.dot(vn);
    if (sc.loads.content_source) row.power_influx += w(n) * sc.loads.content_source(t, x) * mu(n);

    row.z_overshoot = std::max({row.z_overshoot, z(n) - 1.0, -z(n)});
  }
  row.chi_active = static_cast<double>(chi_below) / static_cast<double>(nn);

  if (solver.has_boundary()) {
    const BoundaryQuad& bq = solver.boundary();
    const Eigen::VectorXd mub = solver.scalar_boundary() * state.mu;
    const std::vector<Vec> f = solver.boundary_traction(t);
    std::vector<Eigen::VectorXd> vb;
    for (const auto& m : solver.velocity_boundary()) vb.push_back(m * state.v);
    for (std::size_t b = 0; b < bq.size(); ++b) {
      const auto ib = static_cast<Eigen::Index>(b);
      const double wb = bq.weights[b];
      row.dissip_bdry += wb * sc.loads.transfer * mub(ib) * mub(ib);
      if (sc.loads.influx) row.power_influx += wb * sc.loads.influx(t, bq.points[b]) * mub(ib);
      for (int i = 0; i < d; ++i) row.power_traction += wb * f[b][i] * vb[static_cast<std::size_t>(i)](ib);
    }
  }

  row.mass_residual = mass_residual(ts);
  row.min_detF = min_detF(ts);
  row.max_abs_F = max_abs_F(ts);
  return row;
}

double balance_residual(const std::vector<EnergyLedger>& rows, std::size_t n) {
  if (rows.empty()) return 0.0;
  n = std::min(n, rows.size() - 1);
  double r = rows[n].total() - rows[0].total();
  for (std::size_t m = 1; m <= n; ++m) {
    const double dt = rows[m].time - rows[m - 1].time;
    r += dt * (rows[m].dissipation() - rows[m].power());
  }
  return r;
}

RegularizationActivity regularization_activity(const TransportState& state, double eps) {
  RegularizationActivity act;
  for (const auto& f : state.f) {
    if (det(f) < eps) ++act.det_count;
    if (f.norm() > 1.0 / eps) ++act.norm_count;
  }
  act.det_active = act.det_count > 0;
  act.norm_active = act.norm_count > 0;
  return act;
}

void write_ledger_header(std::ostream& os) {
  const auto& cols = EnergyLedger::columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_ledger_row(std::ostream& os, const EnergyLedger& row) {
  const auto vals = row.values();
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t i = 0; i < vals.size(); ++i) line << (i ? "," : "") << vals[i];
  os << line.str() << '\n';
}

std::vector<EnergyLedger> read_ledger(std::istream& is) {
  std::vector<EnergyLedger> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != EnergyLedger::columns().size()) throw IoError("malformed ledger row: " + line);
    EnergyLedger r;
    double* fields[] = {&r.time,         &r.kinetic,       &r.stored,         &r.dissip_visc,
                        &r.dissip_diff,  &r.dissip_bdry,   &r.power_gravity,  &r.power_traction,
                        &r.power_influx, &r.mass_residual, &r.min_detF,       &r.max_abs_F,
                        &r.z_overshoot,  &r.chi_active};
    for (std::size_t i = 0; i < vals.size(); ++i) *fields[i] = vals[i];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace eulergel
