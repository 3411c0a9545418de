#pragma once

// Transport of the collocated fields F, rho, rho_R (and optionally F^{-1})
// under a frozen discrete velocity, by sub-stepped SSP-RK2 with spectral
// collocation derivatives.

#include <cstddef>
#include <vector>

#include "eulergel/grid.hpp"
#include "eulergel/tensor.hpp"

namespace eulergel {

struct TransportState {
  std::vector<Tensor2> f;
  std::vector<double> rho;
  /// Referential density rho_0 det F(0), a material constant.
  std::vector<double> rho_r;
  /// Co-evolved inverse; empty unless tracked.
  std::vector<Tensor2> f_inv;

  std::size_t size() const noexcept { return f.size(); }
};

/// Velocity and its gradient sampled at the grid nodes.
struct VelocitySample {
  std::vector<Vec> v;
  std::vector<Tensor2> grad;
};

struct TransportOptions {
  double cfl = 0.5;
  /// Positivity floor on det F (and rho); LossOfPositivity below it.
  double det_min = 0.0;
  double eps_f = 0.0;
  double r = 3.0;
};

class Transport {
 public:
  explicit Transport(const QuadGrid& grid) : grid_(&grid) {}

  /// Advances every tracked field over dt; returns the number of substeps.
  /// The state is left untouched when an error is thrown.
  int advance(TransportState& state, const VelocitySample& vel, double dt,
              const TransportOptions& opt) const;

  /// dF/dt = (grad v) F - (v . grad) F.
  int advance_F(TransportState& state, const VelocitySample& vel, double dt,
                const TransportOptions& opt = {}) const;
  /// Adds eps_F div(|grad F|^{r-2} grad F) with (grad F) n = 0 on the boundary.
  int advance_F_regularized(TransportState& state, const VelocitySample& vel, double dt,
                            double eps_f, double r, const TransportOptions& opt = {}) const;
  /// d rho/dt = -div(rho v).
  int advance_rho(TransportState& state, const VelocitySample& vel, double dt,
                  const TransportOptions& opt = {}) const;

  /// Stable substep count for the given velocity and options.
  int substeps(const VelocitySample& vel, double dt, const TransportOptions& opt,
               double grad_f_max = 0.0) const;

 private:
  enum Fields : unsigned { kF = 1, kRho = 2, kRhoR = 4, kFinv = 8 };
  int run(TransportState& state, const VelocitySample& vel, double dt,
          const TransportOptions& opt, unsigned fields) const;

  const QuadGrid* grid_;
};

/// rho_R / det F; throws DegenerateState where det F <= 0.
std::vector<double> rho_from_F(const TransportState& state);
double min_detF(const TransportState& state);
double max_abs_F(const TransportState& state);
/// max |rho det F - rho_R|.
double mass_residual(const TransportState& state);

/// Uniform state F = f0, rho_R = rho0 and rho = rho0 / det f0 on every node.
TransportState uniform_state(std::size_t nodes, const Tensor2& f0, double rho0);

}  // namespace eulergel
