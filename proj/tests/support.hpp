#pragma once

// Small hand-built scenes shared by the unit tests and the acceptance run.

#include <cmath>
#include <random>

#include "stabmpm/scenarios.hpp"
#include "stabmpm/simulation.hpp"

namespace stabmpm::testing {

struct PatchOptions {
  int cells = 2;
  double h = 0.25;
  Regime regime = Regime::Dynamic;
  bool stabilized = true;
  bool constrained = true;  // rollers on the sides, fixed bottom
  bool drained_top = false;
  double k0 = 1e-12;
  double alpha_vis = 0.04;
  double dt = 1e-3;
  int ppc = 2;
};

inline Scene patch_scene(const PatchOptions& o = {}) {
  Scene s;
  s.name = "patch";
  const double L = o.cells * o.h;
  s.grid = BackgroundGrid::build({0.0, 0.0}, {L, L}, o.h);
  MaterialParams m;
  m.lambda = 8.4e6;
  m.G = 5.6e6;
  m.alpha_vis = o.regime == Regime::Dynamic ? o.alpha_vis : 0.0;
  m.k0 = o.k0;
  m.mu_f = 1e-3;
  m.phi0 = 0.33;
  m.rho_s = 2500.0;
  m.rho_f = 1000.0;
  m.gravity = {0.0, -9.81};
  s.materials = {m};
  s.particles = seed_lattice(s.grid, Box{0.0, L, 0.0, L}, o.ppc, o.ppc, 0, m.phi0);
  if (o.constrained) {
    BoundaryCondition left, right, bottom;
    left.kind = right.kind = BcKind::Roller;
    left.component = right.component = 0;
    left.box = Box{0.0, 0.0, -1e300, 1e300};
    right.box = Box{L, L, -1e300, 1e300};
    bottom.kind = BcKind::FixedDisplacement;
    bottom.box = Box{-1e300, 1e300, 0.0, 0.0};
    s.bcs = {left, right, bottom};
  }
  if (o.drained_top) {
    BoundaryCondition top;
    top.kind = BcKind::Pressure;
    top.box = Box{-1e300, 1e300, L, L};
    s.bcs.push_back(top);
  }
  s.integ.regime = o.regime;
  s.integ.dt = o.dt;
  s.t_end = 100.0 * o.dt;
  s.stabilized = o.stabilized;
  return s;
}

// Perturb the particle state and positions (still inside their cells).
inline void randomize(Scene& s, unsigned seed, double strain = 0.02) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = s.grid.h;
  for (auto& mp : s.particles) {
    mp.x.x += 0.1 * h * u(rng);
    mp.x.y += 0.1 * h * u(rng);
    mp.F = Tensor2d::identity();
    mp.F(0, 0) += strain * u(rng);
    mp.F(1, 1) += strain * u(rng);
    mp.F(0, 1) += strain * u(rng);
    mp.F(1, 0) += strain * u(rng);
    const double J = det(mp.F);
    mp.V = mp.V0 * J;
    mp.phi = 1.0 - (1.0 - s.materials[mp.material].phi0) / J;
    mp.v = {0.1 * u(rng), 0.1 * u(rng)};
    mp.a = {u(rng), u(rng)};
    mp.p = 1e4 * u(rng);
    mp.p_dot = 1e5 * u(rng);
    mp.p_ddot = 1e6 * u(rng);
  }
}

// Random trial state on the free dofs of a prepared step.
inline void randomize_trial(StepProblem& prob, unsigned seed, double du = 1e-4, double dp = 1e4) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const DofMap& d = prob.dofs;
  for (std::size_t n = 0; n < d.u.size(); ++n) {
    for (int c = 0; c < 2; ++c)
      if (d.u[n][c] >= 0) prob.trial.U[n][c] = du * u(rng);
    if (d.p[n] >= 0) prob.trial.P[n] = dp * u(rng);
  }
}

inline double rel_diff(const Vec& a, const Vec& b) {
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? (a - b).norm() / s : 0.0;
}

}  // namespace stabmpm::testing
