#include <doctest.h>

#include "eulergel/errors.hpp"
#include "eulergel/solver.hpp"
#include "helpers.hpp"

using namespace eulergel;

namespace {

const double kPi = std::acos(-1.0);

Scenario base(bool periodic_x, bool periodic_y, int degree = 6) {
  Scenario sc;
  sc.box.dim = 2;
  sc.box.periodic = {periodic_x, periodic_y, false};
  sc.degree_v = degree;
  sc.degree_z = degree;
  sc.dt = 1e-2;
  sc.material.dissipation.p = 2.0;
  sc.material.dissipation.nu = 1e-3;
  sc.initial.content = [](const Vec&) { return 0.4; };
  return sc;
}

// Energy depending on z only: phi_hat = h1 z + kappa_h z^2 / 2, no swelling.
void z_only(MaterialModel& m, double h1, double kappa_h) {
  m.energy = OgdenEnergy{0, 0, 0, 0, 0, 0, kappa_h, h1};
  m.swelling.kind = SwellingLaw::Kind::constant;
}

StepData frozen(const Solver& s, const FieldState& st, double dt) {
  StepData d;
  d.dt = dt;
  d.time = st.time + dt;
  d.v_old = st.v;
  d.z_old = st.z;
  d.z = st.z;
  d.before = st.transport;
  d.after = st.transport;
  (void)s;
  return d;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("uniform rest state has zero momentum residual") {
  const Solver solver(base(false, false));
  const FieldState st = solver.initial_state();
  const StepData d = frozen(solver, st, 1e-2);
  CHECK(solver.momentum_residual(d, st.v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniform pressure does no work on admissible velocities") {
  Scenario sc = base(false, true);
  z_only(sc.material, 2 * kPi, 0.0);
  sc.initial.content = [](const Vec&) { return 0.5; };
  const Solver solver(sc);
  const FieldState st = solver.initial_state();
  const Tensor2 t = cauchy_stress(sc.material, Tensor2::identity(2), 0.5);
  CHECK(t(0, 0) == doctest::Approx(kPi));
  CHECK(t(0, 1) == 0.0);
  CHECK(solver.momentum_residual(frozen(solver, st, 1e-2), st.v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("linear momentum problem converges in one Newton step") {
  Scenario sc = base(false, false);
  sc.loads.gravity = [](double, const Vec& x) { return Vec{std::sin(kPi * x[1]), 0.3 * x[0]}; };
  const Solver solver(sc);
  const FieldState st = solver.initial_state();
  NewtonReport rep;
  solver.solve_momentum(frozen(solver, st, 1e-2), &rep);
  CHECK(rep.initial_residual > 1e-3);
  CHECK(rep.iterations == 1);
}

TEST_CASE("hyperviscous Newton iteration contracts quadratically") {
  Scenario sc = base(true, true);
  sc.material.dissipation.p = 3.0;
  sc.material.dissipation.nu = 0.05;
  sc.options.newton_atol = 1e-15;
  sc.options.newton_rtol = 1e-15;
  sc.initial.velocity = [](const Vec& x) {
    return Vec{0.3 * std::sin(2 * kPi * x[1]), 0.2 * std::cos(2 * kPi * x[0])};
  };
  sc.loads.gravity = [](double, const Vec& x) { return Vec{5.0 * std::cos(2 * kPi * x[1]), 0.0}; };
  const Solver solver(sc);
  const FieldState st = solver.initial_state();
  NewtonReport rep;
  try {
    solver.solve_momentum(frozen(solver, st, 1e-2), &rep);
  } catch (const NonlinearSolveFailure&) {
    // Round-off stagnation below 1e-15 is expected; the history is what matters.
  }
  const auto& h = rep.history;
  REQUIRE(h.size() >= 4);
  std::size_t k = 1;
  while (k + 1 < h.size() && h[k + 1] > 1e-12 * h[0]) ++k;
  CHECK(h[k] / h[k - 1] < h[k - 1] / h[k - 2]);
  CHECK(h[k] <= 10.0 * h[k - 1] * h[k - 1] / h[k - 2]);
}

TEST_CASE("uniform content at boundary equilibrium is steady") {
  Scenario sc = base(false, false);
  sc.loads.transfer = 0.7;
  const double mu0 = chemical_potential(sc.material, Tensor2::identity(2), 0.4, sc.reg);
  sc.loads.influx = [mu0](double, const Vec&) { return 0.7 * mu0; };
  const Solver solver(sc);
  const FieldState st = solver.initial_state();
  CHECK(solver.diffusion_residual(frozen(solver, st, 1e-2), st.z).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("content diffusion decays like the analytic Fourier mode") {
  Scenario sc = base(true, true, 8);
  z_only(sc.material, 0.0, 1.0);
  sc.material.mobility.m0 = 1e-2;
  sc.initial.content = [](const Vec& x) { return 0.5 + 0.1 * std::cos(2 * kPi * x[0]); };
  const Solver solver(sc);
  FieldState st = solver.initial_state();
  const double dt = 1e-3;
  for (int n = 0; n < 500; ++n) {
    StepData d = frozen(solver, st, dt);
    st.z = solver.solve_diffusion(d).first;
    st.time += dt;
  }
  const double rate = 1e-2 * 4 * kPi * kPi;
  const auto z = eval_field(solver.scalar_space(), st.z, {Vec{0.0, 0.3}, Vec{0.25, 0.6}});
  CHECK(oracle::rel_err(z[0] - 0.5, 0.1 * std::exp(-rate * 0.5)) <= 1e-4);
  CHECK(std::abs(z[1] - 0.5) <= 1e-10);
}

TEST_CASE("manufactured content source reproduces the prescribed content") {
  Scenario sc = base(true, false, 8);
  z_only(sc.material, 0.0, 1.0);
  const double m0 = 0.05;
  sc.material.mobility.m0 = m0;
  // z* = 0.5 + 0.1 t cos(2 pi x) cos(pi y): Neumann-compatible in y, linear in t.
  auto zstar = [](double t, const Vec& x) {
    return 0.5 + 0.1 * t * std::cos(2 * kPi * x[0]) * std::cos(kPi * x[1]);
  };
  sc.loads.content_source = [m0](double t, const Vec& x) {
    const double c = std::cos(2 * kPi * x[0]) * std::cos(kPi * x[1]);
    return 0.1 * c + m0 * 0.1 * t * 5 * kPi * kPi * c;
  };
  sc.initial.content = [zstar](const Vec& x) { return zstar(0.0, x); };
  const Solver solver(sc);
  FieldState st = solver.initial_state();
  for (int n = 0; n < 20; ++n) {
    StepData d = frozen(solver, st, 5e-3);
    st.z = solver.solve_diffusion(d).first;
    st.time = d.time;
  }
  double worst = 0.0;
  const auto& pts = solver.grid().points();
  const auto z = eval_field(solver.scalar_space(), st.z, pts);
  for (std::size_t n = 0; n < pts.size(); ++n) worst = std::max(worst, std::abs(z[n] - zstar(st.time, pts[n])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("stress-free equilibrium is preserved by a full step") {
  Scenario sc = base(true, true);
  sc.material.energy = OgdenEnergy{0, 0, 0, 0, 0, 0.5, 2.0, 0.0};
  sc.initial.content = [](const Vec&) { return 0.3; };
  const Solver solver(sc);
  FieldState st = solver.initial_state();
  const FieldState before = st;
  solver.step(st, 1e-2);
  CHECK(st.v.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((st.z - before.z).cwiseAbs().maxCoeff() <= 1e-10);
  for (std::size_t n = 0; n < st.transport.size(); ++n)
    CHECK(testing::max_abs_diff(st.transport.f[n], before.transport.f[n]) <= 1e-10);
}

TEST_CASE("two half steps agree with one step to second order") {
  Scenario sc = base(false, false);
  sc.initial.velocity = [](const Vec& x) {
    return Vec{0.1 * std::pow(std::sin(kPi * x[0]), 2) * std::sin(2 * kPi * x[1]),
               -0.1 * std::sin(2 * kPi * x[0]) * std::pow(std::sin(kPi * x[1]), 2)};
  };
  sc.initial.content = [](const Vec& x) { return 0.5 + 0.1 * std::cos(kPi * x[0]); };
  const Solver solver(sc);
  const FieldState st0 = solver.initial_state();
  auto defect = [&](double dt) {
    FieldState one = st0, two = st0;
    solver.step(one, dt);
    solver.step(two, 0.5 * dt);
    solver.step(two, 0.5 * dt);
    return (one.v - two.v).norm() + (one.z - two.z).norm();
  };
  const double ratio = defect(4e-4) / defect(2e-4);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("traction work") {
  Scenario sc = base(true, false);
  const Solver quiet(sc);
  Eigen::VectorXd v = Eigen::VectorXd::Random(static_cast<Eigen::Index>(quiet.velocity_space().size()));
  CHECK(quiet.traction_term(0.0, v) == 0.0);

  // Constant tangential velocity (c, 0) and f = (f0 (1 - y), 0): only the face y = 0 works.
  sc.loads.traction = [](double, const Vec& x) { return Vec{1.5 * (1.0 - x[1]), 0.0}; };
  const Solver solver(sc);
  std::vector<Vec> nodal(solver.grid().size(), Vec{0.8, 0.0});
  const Eigen::VectorXd c = project_velocity(solver.velocity_space(), solver.grid(), nodal);
  CHECK(solver.traction_term(0.0, c) == doctest::Approx(1.5 * 0.8 * 1.0));

  // Normal components are discarded and reported.
  Scenario sn = base(false, false);
  sn.loads.traction = [](double, const Vec& x) { return Vec{x[0] * x[0] + 0.2, 0.3 * x[1]}; };
  const Solver ns(sn);
  double violation = 0.0;
  const auto f = ns.boundary_traction(0.0, &violation);
  CHECK(violation == doctest::Approx(1.2));
  for (std::size_t b = 0; b < f.size(); ++b) CHECK(std::abs(f[b].dot(ns.boundary().normals[b])) <= 1e-15);

  // Polynomial data against a refined face-by-face Gauss oracle.
  Eigen::VectorXd r = Eigen::VectorXd::Random(static_cast<Eigen::Index>(ns.velocity_space().size()));
  double ref = 0.0;
  std::vector<double> xs, ws;
  oracle::gauss(24, 0.0, 1.0, xs, ws);
  for (int axis = 0; axis < 2; ++axis)
    for (double side : {0.0, 1.0}) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        Vec x(2), nrm(2);
        x[axis] = side;
        x[1 - axis] = xs[k];
        nrm[axis] = side == 0.0 ? -1.0 : 1.0;
        Vec ft = sn.loads.traction(0.0, x);
        ft -= ft.dot(nrm) * nrm;
        const Vec vv = eval_field(ns.velocity_space(), r, {x})[0];
        ref += ws[k] * ft.dot(vv);
      }
    }
  CHECK(ns.traction_term(0.0, r) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("time integration halves dt and reports loss of positivity") {
  Scenario sc = base(false, false);
  sc.material.energy.mu1 = 0.1;
  sc.material.energy.bulk = 0.1;
  sc.material.energy.kappa = 0.05;
  sc.material.dissipation.eta0 = 0.01;
  sc.loads.gravity = [](double, const Vec&) { return Vec{0.0, -2000.0}; };
  sc.dt = 1e-3;
  const Solver solver(sc);
  FieldState st = solver.initial_state();
  CHECK_THROWS_AS(solver.integrate(st, 1.0, nullptr), LossOfPositivity);
  CHECK(std::isfinite(st.v.norm()));
  CHECK(min_detF(st.transport) > 0.0);
}

TEST_CASE("invalid scenarios are rejected") {
  Scenario sc = base(false, false);
  sc.material.dissipation.p = 1.5;
  CHECK_THROWS_AS(Solver{sc}, Error);
  Scenario sd = base(false, false);
  sd.material.dim = 3;
  CHECK_THROWS_AS(Solver{sd}, DimensionMismatch);
}

}
