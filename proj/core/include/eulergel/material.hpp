#pragma once

// Constitutive layer of the swelling gel: swelling stretch, Ogden-type stored
// energy written in terms of the total deformation gradient, Cauchy stress,
// chemical potential, Kelvin-Voigt and hyperviscous stresses, mobility, and
// the cut-off / determinant-floor / Yosida regularizations of the scheme.

#include <string>
#include <utility>
#include <vector>

#include "eulergel/tensor.hpp"

namespace eulergel {

struct StretchValue {
  double value = 1.0;
  double slope = 0.0;
  double curvature = 0.0;
};

/// Isotropic swelling stretch lambda(z), F_s = lambda(z) I.
struct SwellingLaw {
  enum class Kind { constant, affine };

  Kind kind = Kind::affine;
  double lambda0 = 1.0;
  double beta = 0.3;

  /// No positivity check; see lambda_eval() for the checked version.
  StretchValue eval(double z) const noexcept;
};

/// phi(Fe, z) = f1(z) tr(Ce) + f2(z) tr Cof(Ce) + bulk (det Fe - 1)^2
///            + kappa / det Fe + h(z),   Ce = Fe Fe^T,
/// with f_i(z) = mu_i (1 - a_i z) and h(z) = h1 z + kappa_h z^2 / 2.
struct OgdenEnergy {
  double mu1 = 1.0;
  double a1 = 0.5;
  double mu2 = 0.0;
  double a2 = 0.0;
  double bulk = 2.0;
  double kappa = 0.5;
  double kappa_h = 2.0;
  double h1 = 0.0;
};

/// zeta(z, e) = eta(z) |e|^2 + eta_bulk/2 (tr e)^2 plus the hyperviscous
/// potential nu/p |grad e|^p.
struct Dissipation {
  double eta0 = 0.5;
  double eta1 = 0.0;
  double eta_bulk = 0.0;
  double nu = 1e-3;
  double p = 3.0;

  /// eta0 + eta1 * clamp(z, 0, 1).
  double eta(double z) const noexcept;
};

struct Mobility {
  enum class Kind { constant, inverse_det };

  Kind kind = Kind::constant;
  double m0 = 0.1;
  /// Lower bound applied by mobility_hat.
  double floor = 1e-4;
};

struct Regularization {
  double epsilon = 0.05;
  /// Yosida stiffness in Pa, independent of the Galerkin degree.
  double yosida_k = 1e3;
  double eps_f = 0.0;
  double r = 3.0;
};

struct MaterialModel {
  int dim = 2;
  SwellingLaw swelling;
  OgdenEnergy energy;
  Dissipation dissipation;
  Mobility mobility;
  /// Modulus used by the z-convexity certificate.
  double convexity_modulus = 1.0;
};

/// Checked swelling law: (lambda, lambda'); throws NonPositiveStretch.
std::pair<double, double> lambda_eval(const SwellingLaw& law, double z);

/// Raw stored energy density phi(Fe, z); throws DegenerateState if det Fe <= 0.
double stored_energy(const MaterialModel& model, const Tensor2& fe, double z);

/// Value and derivatives of phi_hat(F, z) = phi(F / lambda(z), z).
struct EnergyDerivatives {
  double value = 0.0;
  Tensor2 d_f;
  double d_z = 0.0;
  double d_zz = 0.0;
};

EnergyDerivatives phi_hat_derivatives(const MaterialModel& model, const Tensor2& f, double z);

double phi_hat(const MaterialModel& model, const Tensor2& f, double z);
std::pair<Tensor2, double> dphi_hat(const MaterialModel& model, const Tensor2& f, double z);

/// T = d_F phi_hat F^T + phi_hat I.
Tensor2 cauchy_stress(const MaterialModel& model, const Tensor2& f, double z);

/// mu = chi_eps(F) d_z phi_hat + N_k(z).
double chemical_potential(const MaterialModel& model, const Tensor2& f, double z,
                          const Regularization& reg);

/// Yosida approximation of the normal cone of [0, 1].
double yosida(double z, double k) noexcept;
double yosida_slope(double z, double k) noexcept;
/// Penalty energy (k/2) dist(z, [0,1])^2 whose derivative is yosida().
double yosida_energy(double z, double k) noexcept;

/// Clamped cubic smoothstep S(u).
double smoothstep(double u) noexcept;

struct CutoffValue {
  double value = 1.0;
  Tensor2 gradient;
};

double cutoff_chi(const Tensor2& f, double eps) noexcept;
CutoffValue cutoff_chi_with_gradient(const Tensor2& f, double eps) noexcept;

/// det_eps F = max(det F, eps).
double det_floor(const Tensor2& f, double eps) noexcept;

/// Cut-off energy response used by the regularized scheme; defined for every F.
struct RegularizedResponse {
  double chi = 1.0;
  double energy = 0.0;   // chi phi_hat
  Tensor2 stress;        // [phi_hat_eps]_F F^T + phi_hat_eps I
  double mu = 0.0;       // chi d_z phi_hat + N_k
  double dmu_dz = 0.0;
};

RegularizedResponse regularized_response(const MaterialModel& model, const Tensor2& f, double z,
                                         const Regularization& reg, bool with_stress = true);

double dissipation_potential(const MaterialModel& model, double z, const Tensor2& e) noexcept;
Tensor2 viscous_stress(const MaterialModel& model, double z, const Tensor2& e) noexcept;
Tensor3 hyperstress(const MaterialModel& model, const Tensor3& grad_e) noexcept;

/// m(F / lambda(z), z), floored at model.mobility.floor.
double mobility_hat(const MaterialModel& model, const Tensor2& f, double z);
/// Floored mobility and its z-derivative (zero where the floor is active).
std::pair<double, double> mobility_hat_with_slope(const MaterialModel& model, const Tensor2& f,
                                                  double z);

enum class CheckStatus { pass, fail, skipped };

struct AssumptionCheck {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const noexcept;
  const AssumptionCheck* find(const std::string& name) const noexcept;
  std::vector<std::string> failed() const;
  std::string to_text() const;
};

/// Sampled certificate of the structural hypotheses on the material model:
/// coercivity, strong convexity in z, dissipation bounds, positive swelling,
/// positive mobility and p > d.
AssumptionReport check_assumptions(const MaterialModel& model, int sample_budget = 2000);

}  // namespace eulergel
