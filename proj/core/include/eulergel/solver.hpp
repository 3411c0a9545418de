#pragma once

// Staggered time stepping of the regularized gel system: transport of F and
// rho with the old velocity, an implicit Galerkin solve for the content z
// (with the chemical potential carried as the L2 projection of its pointwise
// value), then an implicit Galerkin momentum solve with Kelvin-Voigt
// viscosity and hyperviscosity.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eulergel/grid.hpp"
#include "eulergel/material.hpp"
#include "eulergel/tensor.hpp"
#include "eulergel/transport.hpp"

namespace eulergel {

using ScalarField = std::function<double(double t, const Vec& x)>;
using VectorField = std::function<Vec(double t, const Vec& x)>;

struct Loads {
  VectorField gravity;   // g, m/s^2
  VectorField traction;  // f on the boundary; only the tangential part is applied
  ScalarField influx;    // h on the boundary
  double transfer = 0.0; // boundary transfer coefficient (kappa in mu-flux)
  /// Verification-only volume sources added to the momentum and content equations.
  VectorField momentum_source;
  ScalarField content_source;
};

struct InitialData {
  std::function<Vec(const Vec&)> velocity;
  std::function<Tensor2(const Vec&)> deformation;
  std::function<double(const Vec&)> content;
  /// Referential density rho_R.
  std::function<double(const Vec&)> density;
};

struct SolverOptions {
  double newton_atol = 1e-10;
  double newton_rtol = 1e-8;
  int newton_max = 25;
  int max_halvings = 6;
  double cfl = 0.5;
};

struct Scenario {
  Box box;
  int degree_v = 8;
  int degree_z = 8;
  int quad_extra = 3;
  MaterialModel material;
  Regularization reg;
  Loads loads;
  InitialData initial;
  double t_end = 1.0;
  double dt = 1e-3;
  SolverOptions options;
  bool track_inverse = false;
};

struct FieldState {
  double time = 0.0;
  Eigen::VectorXd v;
  Eigen::VectorXd z;
  Eigen::VectorXd mu;
  TransportState transport;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double residual = 0.0;
  std::vector<double> history;
};

struct StepReport {
  double dt = 0.0;
  int substeps = 0;
  int halvings = 0;
  NewtonReport diffusion;
  NewtonReport momentum;
};

/// Frozen data of one staggered step. `after` is the transported state and
/// `z` the content used by the momentum solve.
struct StepData {
  double dt = 0.0;
  double time = 0.0;  // new time level
  Eigen::VectorXd v_old;
  Eigen::VectorXd z_old;
  TransportState before;
  TransportState after;
  Eigen::VectorXd z;
};

class Solver {
 public:
  explicit Solver(Scenario scenario);

  const Scenario& scenario() const noexcept { return sc_; }
  const QuadGrid& grid() const noexcept { return grid_; }
  const VelocitySpace& velocity_space() const noexcept { return vspace_; }
  const ScalarSpace& scalar_space() const noexcept { return zspace_; }
  bool has_boundary() const noexcept { return bq_.has_value(); }
  /// Throws AllPeriodic when the box has no boundary.
  const BoundaryQuad& boundary() const;

  const VelocityTables& velocity_tables() const noexcept { return vt_; }
  const SpaceTables& scalar_tables() const noexcept { return zt_; }
  /// Velocity component tables at boundary points (value[i]).
  const std::vector<Eigen::MatrixXd>& velocity_boundary() const noexcept { return vb_; }
  const Eigen::MatrixXd& scalar_boundary() const noexcept { return zb_; }

  FieldState initial_state() const;

  VelocitySample sample_velocity(const Eigen::VectorXd& v) const;
  Eigen::VectorXd nodal_scalar(const Eigen::VectorXd& coeffs) const;
  /// L2 projection of chi d_z phi_hat + N_k at the nodes.
  Eigen::VectorXd chemical_potential(const TransportState& ts, const Eigen::VectorXd& z) const;
  /// Tangential projection of the traction data at the boundary points; the
  /// removed normal part is accumulated in `normal_violation` when given.
  std::vector<Vec> boundary_traction(double t, double* normal_violation = nullptr) const;

  Eigen::VectorXd diffusion_residual(const StepData& s, const Eigen::VectorXd& z) const;
  /// Returns (z, mu) coefficients.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_diffusion(const StepData& s,
                                                              NewtonReport* report = nullptr) const;

  Eigen::VectorXd momentum_residual(const StepData& s, const Eigen::VectorXd& v) const;
  Eigen::VectorXd solve_momentum(const StepData& s, NewtonReport* report = nullptr) const;

  /// Boundary integral of f . v_test at time t.
  double traction_term(double t, const Eigen::VectorXd& v_test) const;

  /// One staggered step of size dt; throws on failure without touching state.
  StepReport step(FieldState& state, double dt) const;

  /// Steps to t_end with dt halving on failure. Throws LossOfPositivity or
  /// SolverFailure once the halving budget is exhausted.
  void integrate(FieldState& state, double t_end,
                 const std::function<void(const FieldState&, const StepReport&)>& on_step) const;

  double det_min() const noexcept { return det_min_; }

 private:
  struct DiffusionFrozen;
  struct MomentumFrozen;
  DiffusionFrozen freeze_diffusion(const StepData& s) const;
  MomentumFrozen freeze_momentum(const StepData& s) const;
  void diffusion_eval(const DiffusionFrozen& fz, const Eigen::VectorXd& z, Eigen::VectorXd* res,
                      Eigen::MatrixXd* jac, Eigen::VectorXd* mu) const;
  void momentum_eval(const MomentumFrozen& fz, const Eigen::VectorXd& v, Eigen::VectorXd* res,
                     Eigen::MatrixXd* jac) const;

  Scenario sc_;
  QuadGrid grid_;
  VelocitySpace vspace_;
  ScalarSpace zspace_;
  std::optional<BoundaryQuad> bq_;
  VelocityTables vt_;
  SpaceTables zt_;
  std::vector<Eigen::MatrixXd> vb_;
  Eigen::MatrixXd zb_;
  Eigen::MatrixXd z_projector_;  // M^{-1} B^T W
  double det_min_ = 0.0;
};

}  // namespace eulergel
