#include <gtest/gtest.h>

#include <cmath>

#include "stabmpm/constitutive.hpp"
#include "stabmpm/integrator.hpp"

using namespace stabmpm;

namespace {

MaterialParams footing_material() {
  MaterialParams m;
  m.lambda = 8.4e6;
  m.G = 5.6e6;
  m.alpha_vis = 0.04;
  m.k0 = 1e-14;
  m.mu_f = 1e-3;
  m.rho_s = 2500.0;
  m.rho_f = 1000.0;
  m.phi0 = 0.33;
  return m;
}

}  // namespace

// F = diag(1.1, 1): eps = diag(ln 1.1, 0), sigma' = (lambda tr eps 1 + 2 G eps) / J.
TEST(Constitutive, HenckyUniaxialStretch) {
  Tensor2d F = Tensor2d::identity();
  F(0, 0) = 1.1;
  const Tensor2d s = hencky_stress(F, footing_material());
  const double e = std::log(1.1);
  EXPECT_NEAR(s(0, 0), (8.4e6 * e + 2.0 * 5.6e6 * e) / 1.1, 1e-6);
  EXPECT_NEAR(s(1, 1), 8.4e6 * e / 1.1, 1e-6);
  EXPECT_NEAR(s(0, 0), 1.698e6, 1e3);
  EXPECT_NEAR(s(1, 1), 0.728e6, 1e3);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(hencky_out_of_plane(F, footing_material()), 8.4e6 * e / 1.1, 1e-6);
}

TEST(Constitutive, HenckyIsRotationInvariant) {
  Tensor2d F = Tensor2d::identity();
  F(0, 0) = 1.2;
  F(1, 1) = 0.9;
  const double c = std::cos(0.7), s = std::sin(0.7);
  Tensor2d R;
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  const MaterialParams m = footing_material();
  const Tensor2d a = R * hencky_stress(F, m) * transpose(R);
  const Tensor2d b = hencky_stress(R * F, m);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a(i, j), b(i, j), 1e-6);
}

// Kirchhoff stress is the derivative of the Hencky energy: J sigma' : dF F^-1.
TEST(Constitutive, HenckyStressIsEnergyConjugate) {
  const MaterialParams m = footing_material();
  Tensor2d F = Tensor2d::identity();
  F(0, 0) = 1.05;
  F(0, 1) = 0.1;
  F(1, 0) = -0.03;
  F(1, 1) = 0.97;
  Tensor2d D = Tensor2d::zero();
  D(0, 0) = 0.3;
  D(0, 1) = -0.2;
  D(1, 0) = 0.5;
  D(1, 1) = 0.1;
  const double h = 1e-6;
  const double fd = (hencky_energy(F + h * D, m) - hencky_energy(F - h * D, m)) / (2.0 * h);
  const Tensor2d tau = det(F) * hencky_stress(F, m);
  const double an = ddot(tau, D * inverse(F));
  EXPECT_NEAR(fd, an, 1e-6 * std::abs(an));
}

TEST(Constitutive, HenckyRejectsInversion) {
  Tensor2d F = Tensor2d::identity();
  F(0, 0) = -1.0;
  EXPECT_THROW(hencky_stress(F, footing_material()), SingularKinematics);
}

TEST(Constitutive, ComposeStressSignConvention) {
  Tensor2d s = Tensor2d::zero();
  s(0, 0) = 10.0;
  const StressState st = compose_stress(s, Tensor2d::zero(), 4.0);
  EXPECT_DOUBLE_EQ(st.sigma_total(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(st.sigma_total(1, 1), -4.0);
}

TEST(Constitutive, ViscousStress) {
  const MaterialParams m = footing_material();
  Tensor2d d = Tensor2d::zero();
  d(0, 0) = 1.0;
  const Tensor2d s = viscous_stress(d, m);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.04 * (8.4e6 + 2.0 * 5.6e6));
  EXPECT_DOUBLE_EQ(s(1, 1), 0.04 * 8.4e6);
}

TEST(Constitutive, KozenyCarman) {
  MaterialParams m;
  m.k0 = 1e-14;
  m.phi0 = 0.5;
  EXPECT_NEAR(kozeny_carman(0.5, m), 1e-14, 1e-28);
  // 1e-14 * 2 * 0.064 / 0.36
  EXPECT_NEAR(kozeny_carman(0.4, m), 3.5556e-15, 1e-19);
  EXPECT_THROW(kozeny_carman(1.2, m), PorosityRange);
  EXPECT_THROW(kozeny_carman(0.0, m), PorosityRange);
  m.kozeny_carman = false;
  EXPECT_DOUBLE_EQ(permeability(0.4, m), 1e-14);
}

TEST(Constitutive, PorosityFromSolidMassConservation) {
  EXPECT_DOUBLE_EQ(update_porosity(1.0, 0.3), 0.3);
  EXPECT_NEAR(update_porosity(0.9, 0.3), 1.0 - 0.7 / 0.9, 1e-15);
  EXPECT_THROW(update_porosity(0.4, 0.5), PorosityRange);
  // (1 - phi) J is constant
  for (double J : {0.8, 1.0, 1.3}) EXPECT_NEAR((1.0 - update_porosity(J, 0.4)) * J, 0.6, 1e-15);
}

TEST(Constitutive, MixtureDensity) {
  MaterialParams m;
  m.rho_s = 2600.0;
  m.rho_f = 1000.0;
  EXPECT_DOUBLE_EQ(mixture_density(0.5, m), 1800.0);
}

// q = -kappa [grad p - rho_f (g - a)]: hydrostatic pressure gives no flow.
TEST(Constitutive, DarcyFluxHydrostaticIsZero) {
  MaterialParams m;
  m.rho_f = 1000.0;
  m.gravity = {0.0, -9.81};
  const Vec2 grad_p{0.0, -9810.0};
  const Vec2 q = darcy_flux(grad_p, Vec2{0.0, 0.0}, 1e-11, m);
  EXPECT_NEAR(q.x, 0.0, 1e-20);
  EXPECT_NEAR(q.y, 0.0, 1e-20);
  const Vec2 q2 = darcy_flux(Vec2{1e4, 0.0}, Vec2{0.0, 0.0}, 1e-11, m);
  EXPECT_DOUBLE_EQ(q2.x, -1e-7);
}

TEST(Constitutive, ModuliConversions) {
  const MaterialParams a = MaterialParams::from_K_nu(1e6, 0.25);
  EXPECT_NEAR(a.bulk_modulus(), 1e6, 1e-6);
  EXPECT_NEAR(a.G, 0.6e6, 1e-6);
  const MaterialParams b = MaterialParams::from_E_nu(100e3, 0.3);
  EXPECT_NEAR(b.G, 100e3 / 2.6, 1e-9);
  EXPECT_NEAR(b.lambda, 100e3 * 0.3 / (1.3 * 0.4), 1e-9);
}

TEST(Constitutive, ValidateRejectsBadParameters) {
  MaterialParams m = footing_material();
  EXPECT_NO_THROW(m.validate());
  m.phi0 = 1.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = footing_material();
  m.G = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Integrator, NewmarkRatesClosedForm) {
  IntegratorConfig c;
  c.dt = 0.01;
  const double du = 1e-3, v = 0.2, a = -3.0;
  const Rates<double> r = newmark_rates(du, v, a, c);
  const double b = c.beta, g = c.gamma, dt = c.dt;
  const double a1 = (du - dt * v - dt * dt * (0.5 - b) * a) / (b * dt * dt);
  EXPECT_NEAR(r.second, a1, 1e-9);
  EXPECT_NEAR(r.first, v + dt * ((1.0 - g) * a + g * a1), 1e-12);
  EXPECT_DOUBLE_EQ(c.rate_factor(), g / (b * dt));
  EXPECT_DOUBLE_EQ(c.accel_factor(), 1.0 / (b * dt * dt));
}

TEST(Integrator, ImplicitEuler) {
  EXPECT_DOUBLE_EQ(implicit_euler_rate(0.5, 0.25), 2.0);
  EXPECT_THROW(implicit_euler_rate(0.5, 0.0), ConfigError);
  IntegratorConfig q;
  q.regime = Regime::QuasiStatic;
  q.dt = 0.5;
  EXPECT_DOUBLE_EQ(q.rate_factor(), 2.0);
  EXPECT_DOUBLE_EQ(q.accel_factor(), 0.0);
}

// Footing: 2 / (lambda + 2G) - (beta / gamma) 12 kappa dt / h^2.
TEST(Integrator, StabilizationParameterFooting) {
  IntegratorConfig c;
  c.dt = 1e-3;
  const double kappa = 1e-14 / 1e-3;
  const double tau = stabilization_tau(Regime::Dynamic, 8.4e6, 5.6e6, kappa, 0.25, c);
  EXPECT_NEAR(tau, 2.0 / 19.6e6 - (0.3025 / 0.6) * 12.0 * kappa * 1e-3 / 0.0625, 1e-20);
  EXPECT_NEAR(tau, 1.02e-7, 0.01e-7);
  // very permeable: clipped at zero
  EXPECT_DOUBLE_EQ(stabilization_tau(Regime::Dynamic, 8.4e6, 5.6e6, 1.0, 0.25, c), 0.0);
  EXPECT_DOUBLE_EQ(stabilization_tau(Regime::QuasiStatic, 8.4e6, 5.6e6, kappa, 0.25, c), 1.0 / 11.2e6);
}

TEST(Integrator, ValidateRejectsBadSettings) {
  IntegratorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.gamma = 0.4;
  EXPECT_THROW(c.validate(), ConfigError);
}
