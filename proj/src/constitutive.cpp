#include "stabmpm/constitutive.hpp"

#include <cmath>
#include <sstream>

namespace stabmpm {

MaterialParams MaterialParams::from_K_nu(double K, double nu) {
  MaterialParams m;
  m.G = 3.0 * K * (1.0 - 2.0 * nu) / (2.0 * (1.0 + nu));
  m.lambda = K - 2.0 * m.G / 3.0;
  return m;
}

MaterialParams MaterialParams::from_E_nu(double E, double nu) {
  MaterialParams m;
  m.G = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

void MaterialParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("material: " + what); };
  if (!(G > 0.0)) fail("shear modulus must be positive");
  if (!(bulk_modulus() > 0.0)) fail("bulk modulus lambda + 2G/3 must be positive");
  if (!(phi0 > 0.0 && phi0 < 1.0)) fail("initial porosity must lie in (0, 1)");
  if (!(k0 >= 0.0)) fail("permeability must be non-negative");
  if (!(mu_f > 0.0)) fail("fluid viscosity must be positive");
  if (!(rho_s > 0.0) || !(rho_f > 0.0)) fail("densities must be positive");
  if (!(alpha_vis >= 0.0)) fail("damping parameter must be non-negative");
  if (!std::isfinite(gravity.x) || !std::isfinite(gravity.y)) fail("gravity must be finite");
}

StressState compose_stress(const Tensor2d& sigma_inv, const Tensor2d& sigma_vis, double p) {
  StressState s;
  s.sigma_eff_inv = sigma_inv;
  s.sigma_eff_vis = sigma_vis;
  s.p = p;
  s.sigma_total = sigma_inv + sigma_vis;
  s.sigma_total(0, 0) -= p;
  s.sigma_total(1, 1) -= p;
  return s;
}

double hencky_out_of_plane(const Tensor2d& F, const MaterialParams& m) {
  const double J = det(F);
  if (!(J > 0.0)) throw SingularKinematics("det F <= 0");
  return m.lambda * std::log(J) / J;
}

double hencky_energy(const Tensor2d& F, const MaterialParams& m) {
  const Tensor2d eps = spd_log(F * transpose(F));
  const double tr = trace(eps);
  return 0.5 * m.lambda * tr * tr + m.G * ddot(eps, eps);
}

}  // namespace stabmpm
