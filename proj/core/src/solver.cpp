#include "eulergel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eulergel/errors.hpp"

namespace eulergel {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A^T diag(w) B
MatrixXd weighted(const MatrixXd& a, const VectorXd& w, const MatrixXd& b) {
  return a.transpose() * (w.asDiagonal() * b);
}

template <class Eval>
VectorXd newton(const Eval& eval, VectorXd x, const SolverOptions& opt, const std::string& which,
                NewtonReport* report) {
  VectorXd r;
  MatrixXd j;
  eval(x, &r, &j);
  double rn = r.norm();
  NewtonReport rep;
  rep.initial_residual = rn;
  rep.history.push_back(rn);
  const double tol = std::max(opt.newton_atol, opt.newton_rtol * rn);
  int it = 0;
  while (!(rn <= tol)) {
    if (!std::isfinite(rn) || it >= opt.newton_max) {
      if (report) *report = rep;
      throw NonlinearSolveFailure(which, it, rn);
    }
    const VectorXd dx = j.partialPivLu().solve(-r);
    if (!dx.allFinite()) throw NonlinearSolveFailure(which, it, rn);
    double alpha = 1.0;
    VectorXd xt, rt;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, alpha *= 0.5) {
      xt = x + alpha * dx;
      try {
        eval(xt, &rt, nullptr);
      } catch (const Error&) {
        continue;
      }
      if (rt.allFinite() && rt.norm() < rn) {
        accepted = true;
        break;
      }
    }
    ++it;
    if (!accepted) {
      rep.iterations = it;
      rep.residual = rn;
      if (report) *report = rep;
      throw NonlinearSolveFailure(which, it, rn);
    }
    x = xt;
    eval(x, &r, &j);
    rn = r.norm();
    rep.history.push_back(rn);
  }
  rep.iterations = it;
  rep.residual = rn;
  if (report) *report = rep;
  return x;
}

}  // namespace

Solver::Solver(Scenario scenario)
    : sc_(std::move(scenario)),
      grid_(QuadGrid::for_degree(sc_.box, std::max(sc_.degree_v, sc_.degree_z), sc_.quad_extra)),
      vspace_(sc_.box, sc_.degree_v),
      zspace_(sc_.box, sc_.degree_z) {
  if (sc_.material.dim != sc_.box.dim)
    throw DimensionMismatch("material dimension differs from the box dimension");
  if (sc_.material.dissipation.p < 2.0)
    throw Error("hyperviscosity exponent p must be at least 2");
  if (!(sc_.dt > 0.0)) throw Error("time step must be positive");

  if (!sc_.box.all_periodic()) bq_ = boundary_quadrature(grid_);
  vt_ = tabulate_velocity(vspace_, grid_.points(), 2);
  zt_ = zspace_.tensor().tabulate(grid_.points(), 1);
  if (bq_) {
    vb_ = tabulate_velocity(vspace_, bq_->points, 0).value;
    zb_ = zspace_.tensor().tabulate(bq_->points, 0).value;
  }
  const MatrixXd bw = zt_.value.transpose() * grid_.weights().asDiagonal();
  z_projector_ = (bw * zt_.value).ldlt().solve(bw);

  double m = std::numeric_limits<double>::infinity();
  for (const Vec& x : grid_.points()) {
    const Tensor2 f = sc_.initial.deformation ? sc_.initial.deformation(x)
                                              : Tensor2::identity(sc_.box.dim);
    m = std::min(m, det(f));
  }
  if (!(m > 0.0)) throw DegenerateState("initial deformation gradient has det F <= 0");
  det_min_ = 1e-6 * m;
}

const BoundaryQuad& Solver::boundary() const {
  if (!bq_) throw AllPeriodic("scenario box has no boundary");
  return *bq_;
}

VectorXd Solver::nodal_scalar(const VectorXd& coeffs) const { return zt_.value * coeffs; }

VelocitySample Solver::sample_velocity(const VectorXd& v) const {
  const int d = sc_.box.dim;
  VelocitySample s;
  s.v.assign(grid_.size(), Vec(d));
  s.grad.assign(grid_.size(), Tensor2(d));
  for (int i = 0; i < d; ++i) {
    const VectorXd vi = vt_.value[static_cast<std::size_t>(i)] * v;
    for (std::size_t n = 0; n < grid_.size(); ++n) s.v[n][i] = vi(static_cast<Eigen::Index>(n));
    for (int j = 0; j < d; ++j) {
      const VectorXd g = vt_.grad[static_cast<std::size_t>(i * d + j)] * v;
      for (std::size_t n = 0; n < grid_.size(); ++n) s.grad[n](i, j) = g(static_cast<Eigen::Index>(n));
    }
  }
  return s;
}

FieldState Solver::initial_state() const {
  const int d = sc_.box.dim;
  const auto& pts = grid_.points();
  FieldState st;
  std::vector<Vec> v0(pts.size(), Vec(d));
  VectorXd z0 = VectorXd::Zero(static_cast<Eigen::Index>(pts.size()));
  TransportState& ts = st.transport;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    if (sc_.initial.velocity) v0[n] = sc_.initial.velocity(pts[n]);
    if (sc_.initial.content) z0(static_cast<Eigen::Index>(n)) = sc_.initial.content(pts[n]);
    const Tensor2 f = sc_.initial.deformation ? sc_.initial.deformation(pts[n]) : Tensor2::identity(d);
    const double rr = sc_.initial.density ? sc_.initial.density(pts[n]) : 1.0;
    if (!(rr > 0.0)) throw DegenerateState("referential density must be positive");
    ts.f.push_back(f);
    ts.rho_r.push_back(rr);
    ts.rho.push_back(rr / det(f));
    if (sc_.track_inverse) ts.f_inv.push_back(inv(f));
  }
  st.v = project_velocity(vspace_, grid_, v0);
  st.z = project_scalar(zspace_, grid_, z0);
  st.mu = chemical_potential(ts, st.z);
  return st;
}

VectorXd Solver::chemical_potential(const TransportState& ts, const VectorXd& z) const {
  const VectorXd zn = nodal_scalar(z);
  VectorXd mu(zn.size());
  for (Eigen::Index n = 0; n < zn.size(); ++n)
    mu(n) = regularized_response(sc_.material, ts.f[static_cast<std::size_t>(n)], zn(n), sc_.reg,
                                 false)
                .mu;
  return z_projector_ * mu;
}

std::vector<Vec> Solver::boundary_traction(double t, double* normal_violation) const {
  const BoundaryQuad& bq = boundary();
  const int d = sc_.box.dim;
  std::vector<Vec> out(bq.size(), Vec(d));
  double worst = 0.0;
  if (sc_.loads.traction) {
    for (std::size_t b = 0; b < bq.size(); ++b) {
      Vec f = sc_.loads.traction(t, bq.points[b]);
      const double fn = f.dot(bq.normals[b]);
      worst = std::max(worst, std::abs(fn));
      f -= fn * bq.normals[b];
      out[b] = f;
    }
  }
  if (normal_violation) *normal_violation = worst;
  return out;
}

double Solver::traction_term(double t, const VectorXd& v_test) const {
  if (!bq_) return 0.0;
  const std::vector<Vec> f = boundary_traction(t);
  double s = 0.0;
  for (int i = 0; i < sc_.box.dim; ++i) {
    const VectorXd vi = vb_[static_cast<std::size_t>(i)] * v_test;
    for (std::size_t b = 0; b < f.size(); ++b) s += bq_->weights[b] * f[b][i] * vi(static_cast<Eigen::Index>(b));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Diffusion

struct Solver::DiffusionFrozen {
  double dt = 0.0;
  const TransportState* after = nullptr;
  VectorXd z_old;
  std::vector<VectorXd> w;
  VectorXd chi;
  VectorXd source;
  VectorXd chi_b;
  VectorXd h_b;
};

Solver::DiffusionFrozen Solver::freeze_diffusion(const StepData& s) const {
  const int d = sc_.box.dim;
  const auto nn = static_cast<Eigen::Index>(grid_.size());
  DiffusionFrozen fz;
  fz.dt = s.dt;
  fz.after = &s.after;
  fz.z_old = nodal_scalar(s.z_old);
  for (int a = 0; a < d; ++a) fz.w.push_back(vt_.value[static_cast<std::size_t>(a)] * s.v_old);
  fz.chi.resize(nn);
  fz.source = VectorXd::Zero(nn);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto un = static_cast<std::size_t>(n);
    fz.chi(n) = cutoff_chi(s.after.f[un], sc_.reg.epsilon);
    if (sc_.loads.content_source) fz.source(n) = sc_.loads.content_source(s.time, grid_.points()[un]);
  }
  if (bq_) {
    const auto nb = static_cast<Eigen::Index>(bq_->size());
    fz.chi_b.resize(nb);
    fz.h_b = VectorXd::Zero(nb);
    for (Eigen::Index b = 0; b < nb; ++b) {
      Tensor2 f(d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double v = 0.0;
          for (Eigen::Index n = 0; n < nn; ++n)
            if (bq_->trace(b, n) != 0.0) v += bq_->trace(b, n) * s.after.f[static_cast<std::size_t>(n)](i, j);
          f(i, j) = v;
        }
      fz.chi_b(b) = cutoff_chi(f, sc_.reg.epsilon);
      if (sc_.loads.influx) fz.h_b(b) = sc_.loads.influx(s.time, bq_->points[static_cast<std::size_t>(b)]);
    }
  }
  return fz;
}

void Solver::diffusion_eval(const DiffusionFrozen& fz, const VectorXd& c, VectorXd* res,
                            MatrixXd* jac, VectorXd* mu_out) const {
  const int d = sc_.box.dim;
  const auto nn = static_cast<Eigen::Index>(grid_.size());
  const MatrixXd& b = zt_.value;
  const VectorXd& w = grid_.weights();
  const VectorXd zn = b * c;
  std::vector<VectorXd> gz;
  for (int a = 0; a < d; ++a) gz.push_back(zt_.grad[static_cast<std::size_t>(a)] * c);

  VectorXd mu_pt(nn), dmu(nn), mob(nn), mob_z(nn);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const Tensor2& f = fz.after->f[static_cast<std::size_t>(n)];
    const RegularizedResponse rr = regularized_response(sc_.material, f, zn(n), sc_.reg, false);
    mu_pt(n) = rr.mu;
    dmu(n) = rr.dmu_dz;
    const auto [m, mz] = mobility_hat_with_slope(sc_.material, f, zn(n));
    mob(n) = m;
    mob_z(n) = mz;
  }
  const VectorXd mu = z_projector_ * mu_pt;
  std::vector<VectorXd> gmu;
  for (int a = 0; a < d; ++a) gmu.push_back(zt_.grad[static_cast<std::size_t>(a)] * mu);
  if (mu_out) *mu_out = mu;
  const double kap = sc_.loads.transfer;
  const VectorXd one_minus_chi = VectorXd::Ones(nn) - fz.chi;

  if (res) {
    VectorXd vol = (zn - fz.z_old) / fz.dt - fz.source;
    for (int a = 0; a < d; ++a) vol += fz.w[static_cast<std::size_t>(a)].cwiseProduct(gz[static_cast<std::size_t>(a)]);
    VectorXd r = b.transpose() * w.cwiseProduct(vol);
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const VectorXd flux = mob.cwiseProduct(gmu[ua]) + one_minus_chi.cwiseProduct(gz[ua]);
      r += zt_.grad[ua].transpose() * w.cwiseProduct(flux);
    }
    if (bq_) {
      const VectorXd wb = Eigen::Map<const VectorXd>(bq_->weights.data(),
                                                     static_cast<Eigen::Index>(bq_->weights.size()));
      const VectorXd zbv = zb_ * c, mub = zb_ * mu;
      const VectorXd bnd = kap * mub +
                           (VectorXd::Ones(wb.size()) - fz.chi_b).cwiseProduct(zbv) - fz.h_b;
      r += zb_.transpose() * wb.cwiseProduct(bnd);
    }
    *res = r;
  }
  if (jac) {
    MatrixXd j = weighted(b, w / fz.dt, b);
    for (int a = 0; a < d; ++a)
      j += weighted(b, w.cwiseProduct(fz.w[static_cast<std::size_t>(a)]), zt_.grad[static_cast<std::size_t>(a)]);
    const MatrixXd q = z_projector_ * (dmu.asDiagonal() * b);
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const MatrixXd& bx = zt_.grad[ua];
      j += weighted(bx, w.cwiseProduct(mob), bx) * q;
      j += weighted(bx, w.cwiseProduct(mob_z).cwiseProduct(gmu[ua]), b);
      j += weighted(bx, w.cwiseProduct(one_minus_chi), bx);
    }
    if (bq_) {
      const VectorXd wb = Eigen::Map<const VectorXd>(bq_->weights.data(),
                                                     static_cast<Eigen::Index>(bq_->weights.size()));
      if (kap != 0.0) j += weighted(zb_, kap * wb, zb_) * q;
      j += weighted(zb_, wb.cwiseProduct(VectorXd::Ones(wb.size()) - fz.chi_b), zb_);
    }
    *jac = j;
  }
}

VectorXd Solver::diffusion_residual(const StepData& s, const VectorXd& z) const {
  const DiffusionFrozen fz = freeze_diffusion(s);
  VectorXd r;
  diffusion_eval(fz, z, &r, nullptr, nullptr);
  return r;
}

std::pair<VectorXd, VectorXd> Solver::solve_diffusion(const StepData& s, NewtonReport* report) const {
  const DiffusionFrozen fz = freeze_diffusion(s);
  auto eval = [&](const VectorXd& c, VectorXd* r, MatrixXd* j) { diffusion_eval(fz, c, r, j, nullptr); };
  const VectorXd z = newton(eval, s.z_old, sc_.options, "diffusion", report);
  VectorXd mu;
  diffusion_eval(fz, z, nullptr, nullptr, &mu);
  return {z, mu};
}

// ---------------------------------------------------------------------------
// Momentum

struct Solver::MomentumFrozen {
  MatrixXd a_lin;
  VectorXd b_const;
};

Solver::MomentumFrozen Solver::freeze_momentum(const StepData& s) const {
  const int d = sc_.box.dim;
  const auto nn = static_cast<Eigen::Index>(grid_.size());
  const VectorXd& w = grid_.weights();
  const MaterialModel& mat = sc_.material;

  VectorXd rho0(nn), rho1(nn), eta(nn);
  const VectorXd zn = nodal_scalar(s.z);
  std::vector<VectorXd> wv, body(static_cast<std::size_t>(d), VectorXd::Zero(nn));
  std::vector<VectorXd> stress(static_cast<std::size_t>(d * d), VectorXd(nn));
  for (int i = 0; i < d; ++i) wv.push_back(vt_.value[static_cast<std::size_t>(i)] * s.v_old);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const Vec& x = grid_.points()[un];
    const Tensor2& f = s.after.f[un];
    rho0(n) = s.before.rho[un];
    rho1(n) = s.after.rho[un];
    eta(n) = mat.dissipation.eta(zn(n));
    const Tensor2 t = regularized_response(mat, f, zn(n), sc_.reg, true).stress;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) stress[static_cast<std::size_t>(i * d + j)](n) = t(i, j);
    Vec force(d);
    if (sc_.loads.gravity)
      force += (s.after.rho_r[un] / det_floor(f, sc_.reg.epsilon)) * sc_.loads.gravity(s.time, x);
    if (sc_.loads.momentum_source) force += sc_.loads.momentum_source(s.time, x);
    for (int i = 0; i < d; ++i) body[static_cast<std::size_t>(i)](n) = force[i];
  }

  const auto nv = static_cast<Eigen::Index>(vspace_.size());
  MomentumFrozen fz;
  fz.a_lin = MatrixXd::Zero(nv, nv);
  fz.b_const = VectorXd::Zero(nv);
  const VectorXd rho_bar = 0.5 * (rho0 + rho1);
  MatrixXd skew = MatrixXd::Zero(nv, nv);
  MatrixXd div = MatrixXd::Zero(nn, nv);
  for (int i = 0; i < d; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const MatrixXd& vi = vt_.value[ui];
    fz.a_lin += weighted(vi, w.cwiseProduct(rho_bar) / s.dt, vi);
    fz.b_const -= vi.transpose() * w.cwiseProduct(rho0.cwiseProduct(wv[ui]) / s.dt + body[ui]);
    for (int a = 0; a < d; ++a)
      skew += weighted(vi, 0.5 * w.cwiseProduct(rho0).cwiseProduct(wv[static_cast<std::size_t>(a)]),
                       vt_.grad[static_cast<std::size_t>(i * d + a)]);
    div += vt_.grad[static_cast<std::size_t>(i * d + i)];
    for (int j = 0; j < d; ++j) {
      const auto ij = static_cast<std::size_t>(i * d + j);
      fz.b_const += vt_.grad[ij].transpose() * w.cwiseProduct(stress[ij]);
      const MatrixXd e = 0.5 * (vt_.grad[ij] + vt_.grad[static_cast<std::size_t>(j * d + i)]);
      fz.a_lin += weighted(e, 2.0 * w.cwiseProduct(eta), e);
    }
  }
  fz.a_lin += skew - skew.transpose();
  if (mat.dissipation.eta_bulk != 0.0) fz.a_lin += weighted(div, mat.dissipation.eta_bulk * w, div);

  if (bq_ && sc_.loads.traction) {
    const std::vector<Vec> f = boundary_traction(s.time);
    const auto nb = static_cast<Eigen::Index>(bq_->size());
    for (int i = 0; i < d; ++i) {
      VectorXd fb(nb);
      for (Eigen::Index b = 0; b < nb; ++b)
        fb(b) = bq_->weights[static_cast<std::size_t>(b)] * f[static_cast<std::size_t>(b)][i];
      fz.b_const -= vb_[static_cast<std::size_t>(i)].transpose() * fb;
    }
  }
  return fz;
}

void Solver::momentum_eval(const MomentumFrozen& fz, const VectorXd& v, VectorXd* res,
                           MatrixXd* jac) const {
  const VectorXd& w = grid_.weights();
  const auto nn = static_cast<Eigen::Index>(grid_.size());
  const Dissipation& dis = sc_.material.dissipation;
  if (res) *res = fz.a_lin * v + fz.b_const;
  if (jac) *jac = fz.a_lin;
  if (dis.nu == 0.0) return;

  std::vector<VectorXd> g;
  VectorXd n2 = VectorXd::Zero(nn);
  for (const auto& he : vt_.grad_e) {
    g.push_back(he * v);
    n2 += g.back().cwiseAbs2();
  }
  VectorXd a(nn), a2(nn);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const double nrm = std::sqrt(n2(n));
    a(n) = nrm > 0.0 ? dis.nu * std::pow(nrm, dis.p - 2.0) : (dis.p == 2.0 ? dis.nu : 0.0);
    a2(n) = (nrm > 0.0 && dis.p != 2.0) ? dis.nu * (dis.p - 2.0) * std::pow(nrm, dis.p - 4.0) : 0.0;
  }
  const VectorXd wa = w.cwiseProduct(a);
  if (res)
    for (std::size_t k = 0; k < g.size(); ++k) *res += vt_.grad_e[k].transpose() * wa.cwiseProduct(g[k]);
  if (jac) {
    MatrixXd y = MatrixXd::Zero(nn, static_cast<Eigen::Index>(vspace_.size()));
    for (std::size_t k = 0; k < g.size(); ++k) {
      *jac += weighted(vt_.grad_e[k], wa, vt_.grad_e[k]);
      if (dis.p != 2.0) y += g[k].asDiagonal() * vt_.grad_e[k];
    }
    if (dis.p != 2.0) *jac += weighted(y, w.cwiseProduct(a2), y);
  }
}

VectorXd Solver::momentum_residual(const StepData& s, const VectorXd& v) const {
  const MomentumFrozen fz = freeze_momentum(s);
  VectorXd r;
  momentum_eval(fz, v, &r, nullptr);
  return r;
}

VectorXd Solver::solve_momentum(const StepData& s, NewtonReport* report) const {
  const MomentumFrozen fz = freeze_momentum(s);
  auto eval = [&](const VectorXd& c, VectorXd* r, MatrixXd* j) { momentum_eval(fz, c, r, j); };
  return newton(eval, s.v_old, sc_.options, "momentum", report);
}

// ---------------------------------------------------------------------------
// Time stepping

StepReport Solver::step(FieldState& state, double dt) const {
  StepReport rep;
  rep.dt = dt;
  StepData s;
  s.dt = dt;
  s.time = state.time + dt;
  s.v_old = state.v;
  s.z_old = state.z;
  s.before = state.transport;
  s.after = state.transport;

  TransportOptions opt;
  opt.cfl = sc_.options.cfl;
  opt.det_min = det_min_;
  opt.eps_f = sc_.reg.eps_f;
  opt.r = sc_.reg.r;
  rep.substeps = Transport(grid_).advance(s.after, sample_velocity(state.v), dt, opt);

  auto [z, mu] = solve_diffusion(s, &rep.diffusion);
  s.z = z;
  VectorXd v = solve_momentum(s, &rep.momentum);

  state.time = s.time;
  state.v = std::move(v);
  state.z = std::move(z);
  state.mu = std::move(mu);
  state.transport = std::move(s.after);
  return rep;
}

void Solver::integrate(FieldState& state, double t_end,
                       const std::function<void(const FieldState&, const StepReport&)>& on_step) const {
  const double dt_nominal = sc_.dt;
  double dt = dt_nominal;
  std::size_t count = 0;
  while (t_end - state.time > 1e-9 * dt_nominal) {
    double h = std::min(dt, t_end - state.time);
    int halvings = 0;
    StepReport rep;
    for (;;) {
      std::optional<LossOfPositivity> positivity;
      std::string reason;
      double residual = 0.0;
      try {
        rep = step(state, h);
        break;
      } catch (const LossOfPositivity& e) {
        positivity = e;
        reason = e.what();
      } catch (const NonlinearSolveFailure& e) {
        reason = e.what();
        residual = e.residual();
      } catch (const Error& e) {
        reason = e.what();
      }
      if (++halvings > sc_.options.max_halvings) {
        if (positivity) throw *positivity;
        throw SolverFailure(count + 1, state.time, residual, reason);
      }
      h *= 0.5;
    }
    rep.halvings = halvings;
    dt = halvings > 0 ? std::min(dt_nominal, 2.0 * h) : dt_nominal;
    ++count;
    if (on_step) on_step(state, rep);
  }
}

}  // namespace eulergel
