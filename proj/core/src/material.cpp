#include "eulergel/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "eulergel/errors.hpp"

namespace eulergel {

namespace {

void require_positive_stretch(double lambda, double z) {
  if (!(lambda > 0.0))
    throw NonPositiveStretch("swelling stretch lambda(" + std::to_string(z) +
                             ") = " + std::to_string(lambda) + " is not positive");
}

// Second invariant tr Cof(F F^T) and its F-derivative.
std::pair<double, Tensor2> cof_trace(const Tensor2& f) {
  const int d = f.dim();
  switch (d) {
    case 1:
      return {1.0, Tensor2(1)};
    case 2:
      return {f.ddot(f), 2.0 * f};
    default: {
      const Tensor2 c = f * f.transpose();
      const double tr = c.trace();
      const double value = 0.5 * (tr * tr - c.ddot(c));
      Tensor2 g = tr * Tensor2::identity(d) - c;
      return {value, 2.0 * (g * f)};
    }
  }
}

double smoothstep_slope(double u) noexcept {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 6.0 * u * (1.0 - u);
}

}  // namespace

StretchValue SwellingLaw::eval(double z) const noexcept {
  switch (kind) {
    case Kind::constant:
      return {lambda0, 0.0, 0.0};
    case Kind::affine:
    default:
      return {lambda0 + beta * z, beta, 0.0};
  }
}

double Dissipation::eta(double z) const noexcept {
  return eta0 + eta1 * std::clamp(z, 0.0, 1.0);
}

std::pair<double, double> lambda_eval(const SwellingLaw& law, double z) {
  const StretchValue s = law.eval(z);
  require_positive_stretch(s.value, z);
  return {s.value, s.slope};
}

double stored_energy(const MaterialModel& model, const Tensor2& fe, double z) {
  const double je = det(fe);
  if (!(je > 0.0) || !std::isfinite(je))
    throw DegenerateState("stored energy requires det Fe > 0");
  const OgdenEnergy& w = model.energy;
  double value = w.mu1 * (1.0 - w.a1 * z) * fe.ddot(fe);
  if (w.mu2 != 0.0) value += w.mu2 * (1.0 - w.a2 * z) * cof_trace(fe).first;
  value += w.bulk * (je - 1.0) * (je - 1.0);
  value += w.kappa / je;
  value += w.h1 * z + 0.5 * w.kappa_h * z * z;
  return value;
}

EnergyDerivatives phi_hat_derivatives(const MaterialModel& model, const Tensor2& f, double z) {
  const int d = model.dim;
  if (f.dim() != d) throw DimensionMismatch("phi_hat: tensor dimension differs from model");
  const double jac = det(f);
  if (!(jac > 0.0) || !std::isfinite(jac))
    throw DegenerateState("phi_hat requires det F > 0 (got " + std::to_string(jac) + ")");
  const StretchValue s = model.swelling.eval(z);
  require_positive_stretch(s.value, z);
  const double lam = s.value, lam1 = s.slope, lam2 = s.curvature;
  const OgdenEnergy& w = model.energy;

  EnergyDerivatives out;
  out.d_f = Tensor2(d);

  // Terms c (1 - a z) H(F) / lambda^q with H homogeneous of degree q in F.
  auto homogeneous = [&](double c, double a, double h, const Tensor2& dh, double q) {
    if (c == 0.0) return;
    const double fz = c * (1.0 - a * z);
    const double fz1 = -c * a;
    const double lq = std::pow(lam, -q);
    out.value += fz * h * lq;
    out.d_z += fz1 * h * lq - q * fz * h * lam1 * lq / lam;
    out.d_zz += -2.0 * q * fz1 * h * lam1 * lq / lam +
                fz * h * (q * (q + 1.0) * lam1 * lam1 * lq / (lam * lam) - q * lam2 * lq / lam);
    out.d_f += (fz * lq) * dh;
  };
  homogeneous(w.mu1, w.a1, f.ddot(f), 2.0 * f, 2.0);
  if (w.mu2 != 0.0) {
    const auto [i2, di2] = cof_trace(f);
    homogeneous(w.mu2, w.a2, i2, di2, 2.0 * (d - 1));
  }

  const Tensor2 cof_f = cof(f);
  const double lam_d = std::pow(lam, d);

  // bulk (Je - 1)^2 with Je = det F / lambda^d.
  if (w.bulk != 0.0) {
    const double je = jac / lam_d;
    const double je1 = -d * je * lam1 / lam;
    const double je2 = d * (d + 1.0) * je * lam1 * lam1 / (lam * lam) - d * je * lam2 / lam;
    out.value += w.bulk * (je - 1.0) * (je - 1.0);
    out.d_z += 2.0 * w.bulk * (je - 1.0) * je1;
    out.d_zz += 2.0 * w.bulk * (je1 * je1 + (je - 1.0) * je2);
    out.d_f += (2.0 * w.bulk * (je - 1.0) / lam_d) * cof_f;
  }

  // kappa / Je = kappa lambda^d / det F.
  if (w.kappa != 0.0) {
    out.value += w.kappa * lam_d / jac;
    out.d_z += w.kappa * d * std::pow(lam, d - 1) * lam1 / jac;
    out.d_zz += w.kappa * d *
                ((d - 1.0) * std::pow(lam, d - 2) * lam1 * lam1 + std::pow(lam, d - 1) * lam2) /
                jac;
    out.d_f += (-w.kappa * lam_d / (jac * jac)) * cof_f;
  }

  out.value += w.h1 * z + 0.5 * w.kappa_h * z * z;
  out.d_z += w.h1 + w.kappa_h * z;
  out.d_zz += w.kappa_h;
  return out;
}

double phi_hat(const MaterialModel& model, const Tensor2& f, double z) {
  return phi_hat_derivatives(model, f, z).value;
}

std::pair<Tensor2, double> dphi_hat(const MaterialModel& model, const Tensor2& f, double z) {
  EnergyDerivatives e = phi_hat_derivatives(model, f, z);
  return {e.d_f, e.d_z};
}

Tensor2 cauchy_stress(const MaterialModel& model, const Tensor2& f, double z) {
  const EnergyDerivatives e = phi_hat_derivatives(model, f, z);
  return e.d_f * f.transpose() + e.value * Tensor2::identity(f.dim());
}

double chemical_potential(const MaterialModel& model, const Tensor2& f, double z,
                          const Regularization& reg) {
  const EnergyDerivatives e = phi_hat_derivatives(model, f, z);
  return cutoff_chi(f, reg.epsilon) * e.d_z + yosida(z, reg.yosida_k);
}

double yosida(double z, double k) noexcept {
  if (z > 1.0) return k * (z - 1.0);
  if (z < 0.0) return k * z;
  return 0.0;
}

double yosida_slope(double z, double k) noexcept {
  return (z > 1.0 || z < 0.0) ? k : 0.0;
}

double yosida_energy(double z, double k) noexcept {
  if (z > 1.0) return 0.5 * k * (z - 1.0) * (z - 1.0);
  if (z < 0.0) return 0.5 * k * z * z;
  return 0.0;
}

double smoothstep(double u) noexcept {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

CutoffValue cutoff_chi_with_gradient(const Tensor2& f, double eps) noexcept {
  const double jac = det(f);
  const double norm = f.norm();
  const double u1 = (2.0 * jac - eps) / eps;
  const double u2 = 2.0 - eps * norm;
  const double s1 = smoothstep(u1), s2 = smoothstep(u2);
  CutoffValue out;
  out.value = s1 * s2;
  out.gradient = Tensor2(f.dim());
  const double ds1 = smoothstep_slope(u1), ds2 = smoothstep_slope(u2);
  if (ds1 != 0.0) out.gradient += (ds1 * (2.0 / eps) * s2) * cof(f);
  if (ds2 != 0.0 && norm > 0.0) out.gradient += (-s1 * ds2 * eps / norm) * f;
  return out;
}

double cutoff_chi(const Tensor2& f, double eps) noexcept {
  return smoothstep((2.0 * det(f) - eps) / eps) * smoothstep(2.0 - eps * f.norm());
}

double det_floor(const Tensor2& f, double eps) noexcept { return std::max(det(f), eps); }

RegularizedResponse regularized_response(const MaterialModel& model, const Tensor2& f, double z,
                                         const Regularization& reg, bool with_stress) {
  require_positive_stretch(model.swelling.eval(z).value, z);
  RegularizedResponse r;
  r.stress = Tensor2(f.dim());
  r.mu = yosida(z, reg.yosida_k);
  r.dmu_dz = yosida_slope(z, reg.yosida_k);
  const CutoffValue chi = cutoff_chi_with_gradient(f, reg.epsilon);
  r.chi = chi.value;
  if (chi.value == 0.0) return r;

  const EnergyDerivatives e = phi_hat_derivatives(model, f, z);
  r.energy = chi.value * e.value;
  r.mu += chi.value * e.d_z;
  r.dmu_dz += chi.value * e.d_zz;
  if (with_stress) {
    Tensor2 d_f = chi.value * e.d_f;
    d_f += e.value * chi.gradient;
    r.stress = d_f * f.transpose() + r.energy * Tensor2::identity(f.dim());
  }
  return r;
}

double dissipation_potential(const MaterialModel& model, double z, const Tensor2& e) noexcept {
  const double tr = e.trace();
  return model.dissipation.eta(z) * e.ddot(e) + 0.5 * model.dissipation.eta_bulk * tr * tr;
}

Tensor2 viscous_stress(const MaterialModel& model, double z, const Tensor2& e) noexcept {
  Tensor2 s = (2.0 * model.dissipation.eta(z)) * e;
  s += (model.dissipation.eta_bulk * e.trace()) * Tensor2::identity(e.dim());
  return s;
}

Tensor3 hyperstress(const MaterialModel& model, const Tensor3& grad_e) noexcept {
  const double n = grad_e.norm();
  if (n == 0.0) return Tensor3(grad_e.dim());
  const Dissipation& dis = model.dissipation;
  return (dis.nu * std::pow(n, dis.p - 2.0)) * grad_e;
}

std::pair<double, double> mobility_hat_with_slope(const MaterialModel& model, const Tensor2& f,
                                                  double z) {
  const Mobility& m = model.mobility;
  const double jac = det(f);
  if (!(jac > 0.0)) throw DegenerateState("mobility requires det F > 0");
  double value = m.m0, slope = 0.0;
  if (m.kind == Mobility::Kind::inverse_det) {
    const StretchValue s = model.swelling.eval(z);
    require_positive_stretch(s.value, z);
    const int d = model.dim;
    value = m.m0 * std::pow(s.value, d) / jac;
    slope = m.m0 * d * std::pow(s.value, d - 1) * s.slope / jac;
  }
  if (value < m.floor) return {m.floor, 0.0};
  return {value, slope};
}

double mobility_hat(const MaterialModel& model, const Tensor2& f, double z) {
  return mobility_hat_with_slope(model, f, z).first;
}

bool AssumptionReport::all_passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(),
                      [](const AssumptionCheck& c) { return c.status == CheckStatus::fail; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const noexcept {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<std::string> AssumptionReport::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (c.status == CheckStatus::fail) out.push_back(c.name);
  return out;
}

std::string AssumptionReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    const char* tag = c.status == CheckStatus::pass   ? "PASS"
                      : c.status == CheckStatus::fail ? "FAIL"
                                                      : "SKIP";
    os << tag << "  " << c.name << ": " << c.detail << '\n';
  }
  os << (all_passed() ? "all checks passed" : "some checks failed") << '\n';
  return os.str();
}

namespace {

// Random tensor near the identity rescaled to a prescribed log-uniform det.
Tensor2 sample_tensor(std::mt19937_64& rng, int d, double det_lo, double det_hi) {
  std::uniform_real_distribution<double> entry(-0.5, 0.5);
  std::uniform_real_distribution<double> logdet(std::log(det_lo), std::log(det_hi));
  for (;;) {
    Tensor2 a = Tensor2::identity(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) += entry(rng);
    const double ja = det(a);
    if (ja < 0.05) continue;
    const double target = std::exp(logdet(rng));
    return std::pow(target / ja, 1.0 / d) * a;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

AssumptionReport check_assumptions(const MaterialModel& model, int sample_budget) {
  AssumptionReport report;
  const int d = model.dim;
  const int n = std::max(sample_budget, 10);
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Swelling law: inf over [0, 1] of lambda must be positive.
  {
    double lam_min = std::numeric_limits<double>::infinity();
    double slope_max = 0.0;
    const int grid = std::max(n, 1001);
    for (int i = 0; i < grid; ++i) {
      const double z = static_cast<double>(i) / (grid - 1);
      const StretchValue s = model.swelling.eval(z);
      lam_min = std::min(lam_min, s.value);
      slope_max = std::max(slope_max, std::abs(s.slope));
    }
    const bool ok = lam_min > 0.0 && std::isfinite(slope_max);
    report.checks.push_back({"swelling_positive", ok ? CheckStatus::pass : CheckStatus::fail,
                             "inf lambda on [0,1] = " + fmt(lam_min) +
                                 ", sup |lambda'| = " + fmt(slope_max)});
  }
  const bool swelling_ok = report.checks.back().status == CheckStatus::pass;

  // Coercivity: phi(Fe, z) >= kappa / det Fe for det Fe > 0.
  {
    const double kappa = model.energy.kappa;
    bool ok = kappa > 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n && ok; ++i) {
      const Tensor2 fe = sample_tensor(rng, d, 1e-3, 1e3);
      const double z = unit(rng);
      const double bound = kappa / det(fe);
      const double margin = stored_energy(model, fe, z) - bound;
      worst = std::min(worst, margin);
      if (margin < -1e-12 * (1.0 + std::abs(bound))) ok = false;
    }
    report.checks.push_back({"coercivity", ok ? CheckStatus::pass : CheckStatus::fail,
                             kappa > 0.0 ? "min phi - kappa/det Fe = " + fmt(worst)
                                         : "kappa must be positive"});
  }

  // Uniform strong convexity of z -> phi_hat(F, z) on [0, 1].
  if (!swelling_ok) {
    report.checks.push_back({"z_convexity", CheckStatus::skipped,
                             "phi_hat undefined where the swelling stretch vanishes"});
  } else {
    const double modulus = model.convexity_modulus;
    bool ok = modulus > 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n && ok; ++i) {
      const Tensor2 f = sample_tensor(rng, d, 0.2, 5.0);
      const double z0 = unit(rng), z1 = unit(rng), theta = unit(rng);
      const double zt = theta * z1 + (1.0 - theta) * z0;
      const double p0 = phi_hat(model, f, z0), p1 = phi_hat(model, f, z1);
      const double lhs = phi_hat(model, f, zt);
      const double rhs = theta * p1 + (1.0 - theta) * p0 -
                         0.5 * modulus * theta * (1.0 - theta) * (z1 - z0) * (z1 - z0);
      const double margin = rhs - lhs;
      worst = std::min(worst, margin);
      if (margin < -1e-10 * (1.0 + std::abs(p0) + std::abs(p1))) ok = false;
    }
    report.checks.push_back(
        {"z_convexity", ok ? CheckStatus::pass : CheckStatus::fail,
         modulus > 0.0 ? "modulus " + fmt(modulus) + ", min margin " + fmt(worst)
                       : "convexity modulus must be positive"});
  }

  // eps_bar |e|^2 <= zeta(z, e) <= (1 + |e|^2) / eps_bar.
  {
    const Dissipation& dis = model.dissipation;
    double eta_min = std::numeric_limits<double>::infinity(), eta_max = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = -0.5 + 2.0 * i / 100.0;
      eta_min = std::min(eta_min, dis.eta(z));
      eta_max = std::max(eta_max, dis.eta(z));
    }
    const double upper = eta_max + 0.5 * d * std::max(dis.eta_bulk, 0.0);
    const double eps_bar = std::min(eta_min, 1.0 / upper);
    bool ok = eps_bar > 0.0 && dis.eta_bulk >= 0.0;
    std::uniform_real_distribution<double> entry(-3.0, 3.0);
    for (int i = 0; i < n && ok; ++i) {
      Tensor2 g(d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) g(a, b) = entry(rng);
      const Tensor2 e = sym(g);
      const double z = -0.5 + 2.0 * unit(rng);
      const double zeta = dissipation_potential(model, z, e);
      const double e2 = e.ddot(e);
      if (zeta < eps_bar * e2 * (1.0 - 1e-12) || zeta > (1.0 + e2) / eps_bar * (1.0 + 1e-12))
        ok = false;
    }
    report.checks.push_back({"dissipation_bounds", ok ? CheckStatus::pass : CheckStatus::fail,
                             "eps_bar = " + fmt(eps_bar) + " (eta in [" + fmt(eta_min) + ", " +
                                 fmt(eta_max) + "])"});
  }

  // inf m > 0 over sampled states (the runtime floor is not applied here).
  {
    double m_min = std::numeric_limits<double>::infinity(), m_max = 0.0;
    const Mobility& mob = model.mobility;
    for (int i = 0; i < n; ++i) {
      const Tensor2 fe = sample_tensor(rng, d, 0.2, 5.0);
      const double m = mob.kind == Mobility::Kind::constant ? mob.m0 : mob.m0 / det(fe);
      m_min = std::min(m_min, m);
      m_max = std::max(m_max, m);
    }
    const bool ok = m_min > 0.0 && std::isfinite(m_max);
    report.checks.push_back({"mobility_positive", ok ? CheckStatus::pass : CheckStatus::fail,
                             "sampled m in [" + fmt(m_min) + ", " + fmt(m_max) + "]"});
  }

  {
    const Dissipation& dis = model.dissipation;
    const bool ok = dis.p > d && dis.nu > 0.0;
    report.checks.push_back({"hyperviscosity_exponent", ok ? CheckStatus::pass : CheckStatus::fail,
                             "p = " + fmt(dis.p) + ", d = " + std::to_string(d) +
                                 ", nu = " + fmt(dis.nu)});
  }
  return report;
}

}  // namespace eulergel
