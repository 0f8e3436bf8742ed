#pragma once

// Pointwise constitutive laws. Everything is templated on the scalar so the
// assembly can run the same code on dual numbers.
//
// Sign conventions: stress is tension-positive, pore pressure is
// compression-positive, total stress = effective stress - p * 1.

#include <string>

#include "stabmpm/dual.hpp"
#include "stabmpm/error.hpp"
#include "stabmpm/kinematics.hpp"
#include "stabmpm/tensor.hpp"

namespace stabmpm {

struct MaterialParams {
  double lambda = 0.0;     // Pa
  double G = 0.0;          // Pa
  double alpha_vis = 0.0;  // s
  double k0 = 1e-14;       // m^2
  double phi0 = 0.3;
  double mu_f = 1e-3;  // Pa s
  double rho_s = 2600.0;
  double rho_f = 1000.0;
  Vec2 gravity{0.0, 0.0};
  bool kozeny_carman = false;  // otherwise k = k0 throughout

  static MaterialParams from_K_nu(double K, double nu);
  static MaterialParams from_E_nu(double E, double nu);

  double bulk_modulus() const { return lambda + 2.0 * G / 3.0; }
  double constrained_modulus() const { return lambda + 2.0 * G; }
  double mobility0() const { return k0 / mu_f; }

  // Throws ConfigError naming the first violated bound.
  void validate() const;
};

struct StressState {
  Tensor2d sigma_eff_inv;
  Tensor2d sigma_eff_vis;
  double p = 0.0;
  Tensor2d sigma_total;
};

StressState compose_stress(const Tensor2d& sigma_inv, const Tensor2d& sigma_vis, double p);

// sigma'_inv = tau / J with tau = lambda tr(eps) 1 + 2 G eps, eps = 1/2 ln(F F^T).
template <class T>
Tensor2<T> hencky_stress(const Tensor2<T>& F, const MaterialParams& m, const std::string& who = {}) {
  const T J = det(F);
  if (!(value_of(J) > 0.0)) throw SingularKinematics("det F <= 0" + (who.empty() ? "" : " at " + who));
  const Tensor2<T> eps = spd_log(F * transpose(F), who);
  const T tr = trace(eps);
  Tensor2<T> tau = (2.0 * m.G) * eps;
  tau(0, 0) += m.lambda * tr;
  tau(1, 1) += m.lambda * tr;
  return tau * (1.0 / J);
}

// Plane-strain out-of-plane component of sigma'_inv (the zz strain is zero).
double hencky_out_of_plane(const Tensor2d& F, const MaterialParams& m);

// Hencky strain energy per unit reference volume.
double hencky_energy(const Tensor2d& F, const MaterialParams& m);

template <class T>
Tensor2<T> viscous_stress(const Tensor2<T>& sym_grad_v, const MaterialParams& m) {
  Tensor2<T> s = (2.0 * m.G * m.alpha_vis) * sym_grad_v;
  const T tr = (m.lambda * m.alpha_vis) * trace(sym_grad_v);
  s(0, 0) += tr;
  s(1, 1) += tr;
  return s;
}

template <class T>
T kozeny_carman(const T& phi, const MaterialParams& m) {
  const double p = value_of(phi);
  if (!(p > 0.0 && p < 1.0)) throw PorosityRange("porosity " + std::to_string(p) + " outside (0, 1)");
  const double c = (1.0 - m.phi0) * (1.0 - m.phi0) / (m.phi0 * m.phi0 * m.phi0);
  const T one_minus = 1.0 - phi;
  return (m.k0 * c) * (phi * phi * phi) / (one_minus * one_minus);
}

// Intrinsic permeability per the material's law.
template <class T>
T permeability(const T& phi, const MaterialParams& m) {
  if (m.kozeny_carman) return kozeny_carman(phi, m);
  return T(m.k0);
}

template <class T>
T update_porosity(const T& J, double phi0) {
  const T phi = 1.0 - (1.0 - phi0) / J;
  const double p = value_of(phi);
  if (!(p > 0.0 && p < 1.0)) throw PorosityRange("porosity " + std::to_string(p) + " outside (0, 1)");
  return phi;
}

template <class T>
T mixture_density(const T& phi, const MaterialParams& m) {
  return m.rho_s * (1.0 - phi) + m.rho_f * phi;
}

// q = -kappa [grad p - rho_f (g - a)].
template <class T>
Vector2<T> darcy_flux(const Vector2<T>& grad_p, const Vector2<T>& a, const T& kappa, const MaterialParams& m) {
  Vector2<T> drive = grad_p;
  drive.x -= m.rho_f * (m.gravity.x - a.x);
  drive.y -= m.rho_f * (m.gravity.y - a.y);
  return -(kappa * drive);
}

}  // namespace stabmpm
