#include "eulergel/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eulergel/errors.hpp"

namespace eulergel {

namespace {

struct Layout {
  int d = 0;
  int f = -1, finv = -1, rho = -1, rho_r = -1;
  int cols = 0;
};

}  // namespace

int Transport::substeps(const VelocitySample& vel, double dt, const TransportOptions& opt,
                        double grad_f_max) const {
  const QuadGrid& g = *grid_;
  const int d = g.dim();
  double vmax = 0.0, lmax = 0.0;
  for (std::size_t n = 0; n < vel.v.size(); ++n) {
    for (int a = 0; a < d; ++a) vmax = std::max(vmax, std::abs(vel.v[n][a]));
    lmax = std::max(lmax, vel.grad[n].norm());
  }
  double h = std::numeric_limits<double>::infinity();
  if (vmax > 0.0) h = std::min(h, opt.cfl * g.min_spacing() / vmax);
  if (lmax > 0.0) h = std::min(h, opt.cfl / lmax);
  if (opt.eps_f > 0.0 && grad_f_max > 0.0) {
    double spectral = 0.0;
    for (int a = 0; a < d; ++a) {
      const auto& w = g.axis_weights(a);
      const Eigen::MatrixXd& dm = g.derivative_1d(a);
      Eigen::VectorXd wv(static_cast<Eigen::Index>(w.size()));
      for (std::size_t j = 0; j < w.size(); ++j) wv(static_cast<Eigen::Index>(j)) = w[j];
      const Eigen::MatrixXd lap =
          wv.cwiseInverse().asDiagonal() * dm.transpose() * wv.asDiagonal() * dm;
      spectral += lap.cwiseAbs().rowwise().sum().maxCoeff();
    }
    const double lambda = opt.eps_f * std::pow(grad_f_max, opt.r - 2.0) * spectral;
    if (lambda > 0.0) h = std::min(h, 1.0 / lambda);
  }
  if (!std::isfinite(h)) return 1;
  return std::max(1, static_cast<int>(std::ceil(dt / h - 1e-12)));
}

int Transport::run(TransportState& state, const VelocitySample& vel, double dt,
                   const TransportOptions& opt, unsigned fields) const {
  const QuadGrid& g = *grid_;
  const int d = g.dim();
  const auto nn = static_cast<Eigen::Index>(g.size());
  if (vel.v.size() != g.size() || vel.grad.size() != g.size())
    throw DimensionMismatch("velocity sample does not match the quadrature grid");

  Layout lay;
  lay.d = d;
  if (fields & kF) {
    if (state.f.size() != g.size()) throw DimensionMismatch("F field does not match the grid");
    lay.f = lay.cols;
    lay.cols += d * d;
  }
  if (fields & kFinv) {
    if (state.f_inv.size() != g.size()) throw DimensionMismatch("F^{-1} field does not match the grid");
    lay.finv = lay.cols;
    lay.cols += d * d;
  }
  if (fields & kRho) {
    if (state.rho.size() != g.size()) throw DimensionMismatch("rho field does not match the grid");
    lay.rho = lay.cols++;
  }
  if (fields & kRhoR) {
    if (state.rho_r.size() != g.size()) throw DimensionMismatch("rho_R field does not match the grid");
    lay.rho_r = lay.cols++;
  }

  Eigen::MatrixXd y(nn, lay.cols);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (lay.f >= 0) y(n, lay.f + i * d + j) = state.f[un](i, j);
        if (lay.finv >= 0) y(n, lay.finv + i * d + j) = state.f_inv[un](i, j);
      }
    if (lay.rho >= 0) y(n, lay.rho) = state.rho[un];
    if (lay.rho_r >= 0) y(n, lay.rho_r) = state.rho_r[un];
  }

  const bool regularize = (fields & kF) && opt.eps_f > 0.0;

  auto grad_norms = [&](const std::vector<Eigen::MatrixXd>& dy) {
    Eigen::VectorXd gn = Eigen::VectorXd::Zero(nn);
    for (int a = 0; a < d; ++a)
      gn += dy[static_cast<std::size_t>(a)].middleCols(lay.f, d * d).rowwise().squaredNorm();
    return Eigen::VectorXd(gn.cwiseSqrt());
  };

  auto rate = [&](const Eigen::MatrixXd& yy) {
    std::vector<Eigen::MatrixXd> dy;
    for (int a = 0; a < d; ++a) dy.push_back(g.derivative(a) * yy);
    Eigen::MatrixXd r(nn, lay.cols);
    for (Eigen::Index n = 0; n < nn; ++n) {
      const auto un = static_cast<std::size_t>(n);
      const Vec& v = vel.v[un];
      const Tensor2& l = vel.grad[un];
      for (int c = 0; c < lay.cols; ++c) {
        double adv = 0.0;
        for (int a = 0; a < d; ++a) adv += v[a] * dy[static_cast<std::size_t>(a)](n, c);
        r(n, c) = -adv;
      }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          if (lay.f >= 0) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += l(i, k) * yy(n, lay.f + k * d + j);
            r(n, lay.f + i * d + j) += s;
          }
          if (lay.finv >= 0) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += yy(n, lay.finv + i * d + k) * l(k, j);
            r(n, lay.finv + i * d + j) -= s;
          }
        }
      if (lay.rho >= 0) r(n, lay.rho) -= yy(n, lay.rho) * l.trace();
    }
    if (regularize) {
      const Eigen::VectorXd gn = grad_norms(dy);
      Eigen::VectorXd coef(nn);
      for (Eigen::Index n = 0; n < nn; ++n)
        coef(n) = gn(n) > 0.0 ? opt.eps_f * std::pow(gn(n), opt.r - 2.0) : 0.0;
      for (int a = 0; a < d; ++a) {
        const Eigen::MatrixXd flux =
            coef.asDiagonal() * dy[static_cast<std::size_t>(a)].middleCols(lay.f, d * d);
        r.middleCols(lay.f, d * d) -= g.derivative_adjoint(a) * flux;
      }
    }
    return r;
  };

  double grad_f_max = 0.0;
  if (regularize) {
    std::vector<Eigen::MatrixXd> dy;
    for (int a = 0; a < d; ++a) dy.push_back(g.derivative(a) * y);
    grad_f_max = grad_norms(dy).maxCoeff();
  }
  const int nsub = substeps(vel, dt, opt, grad_f_max);
  const double h = dt / nsub;

  auto check = [&](const Eigen::MatrixXd& yy) {
    for (Eigen::Index n = 0; n < nn; ++n) {
      if (lay.f >= 0) {
        Tensor2 f(d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) f(i, j) = yy(n, lay.f + i * d + j);
        const double jac = det(f);
        if (!(jac > opt.det_min) || !std::isfinite(f.norm()))
          throw LossOfPositivity(static_cast<std::size_t>(n), jac, opt.det_min);
      }
      if (lay.rho >= 0 && !(yy(n, lay.rho) > 0.0))
        throw LossOfPositivity(static_cast<std::size_t>(n), yy(n, lay.rho), 0.0, "rho");
    }
  };

  for (int s = 0; s < nsub; ++s) {
    const Eigen::MatrixXd y1 = y + h * rate(y);
    y = 0.5 * (y + y1 + h * rate(y1));
    check(y);
  }

  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (lay.f >= 0) state.f[un](i, j) = y(n, lay.f + i * d + j);
        if (lay.finv >= 0) state.f_inv[un](i, j) = y(n, lay.finv + i * d + j);
      }
    if (lay.rho >= 0) state.rho[un] = y(n, lay.rho);
    if (lay.rho_r >= 0) state.rho_r[un] = y(n, lay.rho_r);
  }
  return nsub;
}

int Transport::advance(TransportState& state, const VelocitySample& vel, double dt,
                       const TransportOptions& opt) const {
  unsigned fields = kF | kRho | kRhoR;
  if (!state.f_inv.empty()) fields |= kFinv;
  return run(state, vel, dt, opt, fields);
}

int Transport::advance_F(TransportState& state, const VelocitySample& vel, double dt,
                         const TransportOptions& opt) const {
  TransportOptions o = opt;
  o.eps_f = 0.0;
  return run(state, vel, dt, o, kF);
}

int Transport::advance_F_regularized(TransportState& state, const VelocitySample& vel, double dt,
                                     double eps_f, double r, const TransportOptions& opt) const {
  TransportOptions o = opt;
  o.eps_f = eps_f;
  o.r = r;
  return run(state, vel, dt, o, kF);
}

int Transport::advance_rho(TransportState& state, const VelocitySample& vel, double dt,
                           const TransportOptions& opt) const {
  return run(state, vel, dt, opt, kRho);
}

std::vector<double> rho_from_F(const TransportState& state) {
  std::vector<double> out(state.size());
  for (std::size_t n = 0; n < state.size(); ++n) {
    const double jac = det(state.f[n]);
    if (!(jac > 0.0)) throw DegenerateState("rho_from_F: det F <= 0 at node " + std::to_string(n));
    out[n] = state.rho_r[n] / jac;
  }
  return out;
}

double min_detF(const TransportState& state) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : state.f) m = std::min(m, det(f));
  return m;
}

double max_abs_F(const TransportState& state) {
  double m = 0.0;
  for (const auto& f : state.f) m = std::max(m, f.norm());
  return m;
}

double mass_residual(const TransportState& state) {
  double m = 0.0;
  for (std::size_t n = 0; n < state.size(); ++n)
    m = std::max(m, std::abs(state.rho[n] * det(state.f[n]) - state.rho_r[n]));
  return m;
}

TransportState uniform_state(std::size_t nodes, const Tensor2& f0, double rho0) {
  TransportState s;
  s.f.assign(nodes, f0);
  s.rho.assign(nodes, rho0 / det(f0));
  s.rho_r.assign(nodes, rho0);
  return s;
}

}  // namespace eulergel
