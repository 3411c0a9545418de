#include <doctest.h>

#include "eulergel/errors.hpp"
#include "eulergel/transport.hpp"
#include "helpers.hpp"

using namespace eulergel;

namespace {

const double kPi = std::acos(-1.0);

Box periodic_box(double len = 1.0) {
  Box b;
  b.dim = 2;
  b.upper = {len, len, 1.0};
  b.periodic = {true, true, true};
  return b;
}

VelocitySample linear_velocity(const QuadGrid& grid, const Tensor2& a) {
  VelocitySample s;
  for (const Vec& x : grid.points()) {
    s.v.push_back(a * x);
    s.grad.push_back(a);
  }
  return s;
}

// v = (0.05 sin 2 pi x + 0.025 cos 2 pi y, 0.0375 sin 2 pi (x + y)), compressible.
VelocitySample wavy_velocity(const QuadGrid& grid) {
  VelocitySample s;
  const double w = 2 * kPi;
  for (const Vec& p : grid.points()) {
    const double x = p[0], y = p[1];
    s.v.push_back(Vec{0.05 * std::sin(w * x) + 0.025 * std::cos(w * y), 0.0375 * std::sin(w * (x + y))});
    s.grad.push_back(Tensor2{{0.05 * w * std::cos(w * x), -0.025 * w * std::sin(w * y)},
                             {0.0375 * w * std::cos(w * (x + y)), 0.0375 * w * std::cos(w * (x + y))}});
  }
  return s;
}

double max_dev(const TransportState& s, const Tensor2& ref) {
  double m = 0.0;
  for (const Tensor2& f : s.f) m = std::max(m, (f - ref).norm());
  return m;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("zero velocity leaves fields unchanged") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 6);
  const Transport tr(grid);
  const Tensor2 f0{{1.1, 0.2}, {0.0, 0.9}};
  TransportState s = uniform_state(grid.size(), f0, 2.0);
  const VelocitySample zero = linear_velocity(grid, Tensor2(2));
  tr.advance(s, zero, 0.1, {});
  CHECK(max_dev(s, f0) == 0.0);
  for (double r : s.rho) CHECK(r == 2.0 / det(f0));
}

TEST_CASE("uniform F follows the matrix exponential") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 6);
  const Transport tr(grid);
  const Tensor2 f0{{1.2, 0.1}, {-0.2, 0.8}};
  for (const Tensor2& a : {Tensor2{{0.3, 0.8}, {-0.5, -0.2}}, Tensor2{{0.0, 1.0}, {-1.0, 0.0}}}) {
    TransportState s = uniform_state(grid.size(), f0, 1.0);
    const VelocitySample vel = linear_velocity(grid, a);
    const double dt = 1e-3;
    for (int n = 0; n < 500; ++n) tr.advance_F(s, vel, dt);
    oracle::Mat e = oracle::zeros(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) e[i][j] = 0.5 * a(i, j);
    const Tensor2 ref = testing::from_mat(oracle::expm(e)) * f0;
    CHECK(max_dev(s, ref) / f0.norm() <= 1e-6);
  }
}

TEST_CASE("rigid rotation keeps det F over a revolution") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 4);
  const Transport tr(grid);
  const Tensor2 f0{{1.3, 0.4}, {0.1, 0.7}};
  TransportState s = uniform_state(grid.size(), f0, 1.0);
  const VelocitySample vel = linear_velocity(grid, Tensor2{{0.0, 1.0}, {-1.0, 0.0}});
  const int steps = 6284;
  const double dt = 2 * kPi / steps;
  for (int n = 0; n < steps; ++n) tr.advance_F(s, vel, dt);
  for (const Tensor2& f : s.f) CHECK(std::abs(det(f) - det(f0)) / det(f0) <= 1e-8);
}

TEST_CASE("density under uniform expansion") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 4);
  const Transport tr(grid);
  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.5);
  const double alpha = 0.4;
  const VelocitySample vel = linear_velocity(grid, alpha * Tensor2::identity(2));
  for (int n = 0; n < 1000; ++n) tr.advance_rho(s, vel, 1e-3);
  for (double r : s.rho) CHECK(oracle::rel_err(r, 1.5 * std::exp(-2 * alpha * 1.0)) <= 1e-6);
}

TEST_CASE("divergence-free flow keeps a uniform density") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 8);
  const Transport tr(grid);
  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  VelocitySample vel;
  const double w = 2 * kPi;
  for (const Vec& p : grid.points()) {
    vel.v.push_back(Vec{std::sin(w * p[1]), std::cos(w * p[0])});
    vel.grad.push_back(Tensor2{{0.0, w * std::cos(w * p[1])}, {-w * std::sin(w * p[0]), 0.0}});
  }
  for (int n = 0; n < 20; ++n) tr.advance_rho(s, vel, 1e-2);
  for (double r : s.rho) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("advected density agrees with rho_R / det F") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 12);
  const Transport tr(grid);
  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  const VelocitySample vel = wavy_velocity(grid);
  for (int n = 0; n < 50; ++n) tr.advance(s, vel, 1e-2, {});
  const auto rho = rho_from_F(s);
  double worst = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) worst = std::max(worst, std::abs(s.rho[n] - rho[n]));
  CHECK(worst <= 1e-5);
  CHECK(mass_residual(s) <= 1e-5);
  CHECK(min_detF(s) < 0.99);
}

TEST_CASE("det F lower bound from the velocity gradient") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 12);
  const Transport tr(grid);
  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  const VelocitySample vel = wavy_velocity(grid);
  double gmax = 0.0;
  for (const Tensor2& g : vel.grad) gmax = std::max(gmax, g.norm());
  const double t = 0.5;
  for (int n = 0; n < 50; ++n) tr.advance_F(s, vel, t / 50);
  CHECK(min_detF(s) >= std::exp(-gmax * 2 * t));
}

TEST_CASE("p-Laplacian regularization of F") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 8);
  const Transport tr(grid);
  const VelocitySample zero = linear_velocity(grid, Tensor2(2));
  const VelocitySample vel = wavy_velocity(grid);

  TransportState a = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  for (std::size_t n = 0; n < a.size(); ++n) a.f[n](0, 1) = 0.1 * std::sin(2 * kPi * grid.points()[n][0]);
  TransportState b = a;
  tr.advance_F(a, vel, 0.05);
  tr.advance_F_regularized(b, vel, 0.05, 0.0, 3.0);
  for (std::size_t n = 0; n < a.size(); ++n) CHECK(testing::max_abs_diff(a.f[n], b.f[n]) == 0.0);

  TransportState u = uniform_state(grid.size(), Tensor2{{1.1, 0.2}, {0.0, 1.0}}, 1.0);
  tr.advance_F_regularized(u, zero, 0.1, 0.5, 3.0);
  CHECK(max_dev(u, Tensor2{{1.1, 0.2}, {0.0, 1.0}}) == 0.0);

  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double x = grid.points()[n][0], y = grid.points()[n][1];
    s.f[n](0, 0) += 0.2 * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
    s.f[n](1, 0) += 0.1 * std::cos(4 * kPi * x);
  }
  auto deviation = [&](const TransportState& st) {
    Tensor2 mean(2);
    const Eigen::VectorXd& w = grid.weights();
    for (std::size_t n = 0; n < st.size(); ++n) mean += w(static_cast<Eigen::Index>(n)) * st.f[n];
    double dev = 0.0;
    for (std::size_t n = 0; n < st.size(); ++n) {
      const Tensor2 diff = st.f[n] - mean;
      dev += w(static_cast<Eigen::Index>(n)) * diff.ddot(diff);
    }
    return std::sqrt(dev);
  };
  double prev = deviation(s);
  for (int k = 0; k < 10; ++k) {
    tr.advance_F_regularized(s, zero, 0.01, 0.05, 3.0);
    const double cur = deviation(s);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("density from F and diagnostics") {
  TransportState s = uniform_state(4, Tensor2::identity(2), 3.0);
  for (double r : rho_from_F(s)) CHECK(r == 3.0);
  s.f[1] = Tensor2::diag({2.0, 2.0});
  s.rho_r[1] = 4.0;
  CHECK(rho_from_F(s)[1] == 1.0);
  CHECK(min_detF(s) == 1.0);
  s.f[2] = Tensor2::diag({0.1, 0.1});
  CHECK(min_detF(s) == doctest::Approx(0.01));
  CHECK(max_abs_F(s) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("positivity floor") {
  const QuadGrid grid = QuadGrid::for_degree(periodic_box(), 4);
  const Transport tr(grid);
  TransportState s = uniform_state(grid.size(), Tensor2::identity(2), 1.0);
  const TransportState before = s;
  const VelocitySample squeeze = linear_velocity(grid, -3.0 * Tensor2::identity(2));
  TransportOptions opt;
  opt.det_min = 0.5;
  CHECK_THROWS_AS(tr.advance(s, squeeze, 1.0, opt), LossOfPositivity);
  CHECK(max_dev(s, Tensor2::identity(2)) == 0.0);
  CHECK(s.rho == before.rho);
}

}
