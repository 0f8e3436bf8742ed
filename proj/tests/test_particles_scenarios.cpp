#include <gtest/gtest.h>

#include <cmath>

#include "stabmpm/error.hpp"
#include "stabmpm/particles.hpp"
#include "stabmpm/scenarios.hpp"
#include "stabmpm/simulation.hpp"

using namespace stabmpm;

namespace {

MaterialParams soil() {
  MaterialParams m = MaterialParams::from_K_nu(1e6, 0.25);
  m.phi0 = 0.3;
  m.rho_s = 2600.0;
  m.rho_f = 1000.0;
  return m;
}

}  // namespace

TEST(Particles, LatticeSeeding) {
  const BackgroundGrid g = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, 0.25);
  const Particles mps = seed_lattice(g, Box{0.25, 0.75, 0.0, 0.5}, 2, 3, 0, 0.3);
  ASSERT_EQ(mps.size(), 4u * 6u);
  double V = 0.0;
  for (const auto& mp : mps) {
    V += mp.V;
    EXPECT_DOUBLE_EQ(mp.lp.x, 0.0625);
    EXPECT_NEAR(mp.lp.y, 0.25 / 6.0, 1e-15);
    EXPECT_DOUBLE_EQ(mp.phi, 0.3);
    EXPECT_GE(mp.x.x, 0.25);
    EXPECT_LE(mp.x.y, 0.5);
  }
  EXPECT_NEAR(V, 0.25, 1e-14);
  EXPECT_THROW(seed_lattice(g, Box{0.1, 0.75, 0.0, 0.5}, 2, 2, 0, 0.3), ConfigError);
  EXPECT_THROW(seed_lattice(g, Box{0.0, 1.25, 0.0, 0.5}, 2, 2, 0, 0.3), ConfigError);
}

TEST(Particles, DiscSeedingIsPointSymmetric) {
  const BackgroundGrid g = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, 0.04);
  const Vec2 c{0.23, 0.31};
  const Particles mps = seed_disc(g, c, 0.2, 0.016, 0, 0.3);
  // area pi r^2 / s^2 within the lattice discretization error
  EXPECT_NEAR(static_cast<double>(mps.size()), M_PI * 0.04 / (0.016 * 0.016), 0.02 * mps.size());
  Vec2 sum{0.0, 0.0};
  for (const auto& mp : mps) {
    sum += mp.x - c;
    EXPECT_LE(norm(mp.x - c), 0.2 + 1e-12);
  }
  EXPECT_NEAR(sum.x, 0.0, 1e-12);
  EXPECT_NEAR(sum.y, 0.0, 1e-12);
  EXPECT_THROW(seed_disc(g, {0.1, 0.5}, 0.2, 0.016, 0, 0.3), ConfigError);
}

// Homogeneous du = -e x: dF = (1 - e) 1 exactly, also with clipped domains.
TEST(Particles, UniformCompressionUpdate) {
  const BackgroundGrid g = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, 0.25);
  Particles mps = seed_lattice(g, Box{0.0, 1.0, 0.0, 1.0}, 2, 2, 0, 0.3);
  const std::vector<MaterialParams> mats{soil()};
  const TransferPlan plan = build_plan(g, BasisKind::GIMP, geometry(mps), -1, 0.0);
  const double e = 0.01;
  std::vector<Vec2> du(g.node_count());
  std::vector<double> p(g.node_count(), 5.0);
  for (int n = 0; n < g.node_count(); ++n) du[n] = -e * g.node_pos(n);
  NodalState rates;
  rates.resize(g.node_count());
  const double m0 = total_solid_mass(mps, mats);
  post_solution_update(plan, du, p, rates, false, mats, mps);
  const double J = (1.0 - e) * (1.0 - e);
  for (const auto& mp : mps) {
    EXPECT_NEAR(mp.F(0, 0), 1.0 - e, 1e-13);
    EXPECT_NEAR(mp.F(0, 1), 0.0, 1e-13);
    EXPECT_NEAR(mp.V, mp.V0 * J, 1e-15);
    EXPECT_NEAR(mp.phi, 1.0 - 0.7 / J, 1e-13);
    EXPECT_NEAR(mp.p, 5.0, 1e-12);
  }
  EXPECT_NEAR(total_solid_mass(mps, mats), m0, 1e-12 * m0);
  convect_and_update_domains(plan, du, g, mps);
  for (const auto& mp : mps) {
    EXPECT_NEAR(mp.x.x, (1.0 - e) * mp.X.x, 1e-13);
    EXPECT_NEAR(mp.lp.x, (1.0 - e) * mp.lp0.x, 1e-13);
  }
}

TEST(Particles, DomainScalingFollowsStretch) {
  const BackgroundGrid g = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, 0.25);
  Particles mps = seed_lattice(g, Box{0.25, 0.5, 0.25, 0.5}, 2, 2, 0, 0.3);
  for (auto& mp : mps) mp.F = Tensor2d::diag(2.0, 0.5);
  const TransferPlan plan = build_plan(g, BasisKind::GIMP, geometry(mps), -1, 0.0);
  std::vector<Vec2> du(g.node_count());
  convect_and_update_domains(plan, du, g, mps);
  for (const auto& mp : mps) {
    EXPECT_DOUBLE_EQ(mp.lp.x, 0.125);
    EXPECT_DOUBLE_EQ(mp.lp.y, 0.03125);
  }
  // clamped at h / 2
  for (auto& mp : mps) mp.F = Tensor2d::diag(3.0, 1.0);
  convect_and_update_domains(plan, du, g, mps);
  EXPECT_DOUBLE_EQ(mps[0].lp.x, 0.125);
  // a displacement that leaves the grid
  for (auto& u : du) u = {2.0, 0.0};
  EXPECT_THROW(convect_and_update_domains(plan, du, g, mps, 3), OutOfDomain);
}

TEST(Particles, NodalFillOnlyTouchesNewNodes) {
  const BackgroundGrid g = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, 0.5);
  Particles mps = seed_lattice(g, Box{0.0, 1.0, 0.0, 1.0}, 2, 2, 0, 0.3);
  for (auto& mp : mps) {
    mp.v = {1.0, -2.0};
    mp.p = 7.0;
  }
  const std::vector<MaterialParams> mats{soil()};
  const TransferPlan plan = build_plan(g, BasisKind::GIMP, geometry(mps), -1, 0.0);
  NodalState nodal;
  nodal.resize(g.node_count());
  nodal.valid[4] = 1;
  nodal.p[4] = -1.0;
  std::vector<char> need(g.node_count(), 1);
  need[0] = 0;
  p2g_fill(plan, mps, mats, need, nodal);
  EXPECT_EQ(nodal.valid[0], 0);
  EXPECT_DOUBLE_EQ(nodal.p[4], -1.0);  // kept
  EXPECT_NEAR(nodal.p[2], 7.0, 1e-12);
  EXPECT_NEAR(nodal.v[2].y, -2.0, 1e-12);
  const Vec2 P = total_momentum(mps, mats);
  const double M = (0.3 * 1000.0 + 0.7 * 2600.0) * 1.0;
  EXPECT_NEAR(P.x, M, 1e-9);
  EXPECT_NEAR(P.y, -2.0 * M, 1e-9);
}

TEST(Scenarios, TerzaghiExactProperties) {
  // drained top, initial unit pressure, zero-gradient impermeable bottom
  EXPECT_NEAR(terzaghi_exact(0.0, 0.1), 0.0, 1e-12);
  EXPECT_NEAR(terzaghi_exact(0.5, 1e-6), 1.0, 1e-6);
  EXPECT_NEAR(terzaghi_exact(1.0, 0.0001), 1.0, 1e-6);
  const double e = 1e-5;
  EXPECT_NEAR((terzaghi_exact(1.0, 0.3) - terzaghi_exact(1.0 - e, 0.3)) / e, 0.0, 1e-4);
  double prev = terzaghi_exact(0.7, 0.01);
  for (double T : {0.05, 0.1, 0.3, 1.0}) {
    const double v = terzaghi_exact(0.7, T);
    EXPECT_LT(v, prev);
    prev = v;
  }
  // one-term asymptote for large T
  EXPECT_NEAR(terzaghi_exact(1.0, 1.0), 4.0 / M_PI * std::exp(-M_PI * M_PI / 4.0), 1e-10);
}

TEST(Scenarios, OscillationMetric) {
  EXPECT_EQ(oscillation_metric({0.0, 1.0, 2.0, 3.0, 4.0}).sign_flips, 0);
  const OscillationMetric m = oscillation_metric({0.0, 1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.max_jump, 0.25);
  std::vector<double> board;
  for (int k = 0; k < 9; ++k) board.push_back(k % 2 ? 1.0 : 0.0);
  const OscillationMetric c = oscillation_metric(board);
  EXPECT_EQ(c.sign_flips, 7);
  EXPECT_DOUBLE_EQ(c.max_jump, 1.0);
  // plateau samples carry no sign
  EXPECT_EQ(oscillation_metric({0.0, 1.0, 1.0, 2.0}).sign_flips, 0);
  EXPECT_EQ(oscillation_metric({3.0, 3.0, 3.0}).sign_flips, 0);
  EXPECT_THROW(oscillation_metric({1.0, 2.0}), MetricError);
  EXPECT_THROW(oscillation_metric({1.0, NAN, 2.0}), MetricError);
}

TEST(Scenarios, PresetsConstruct) {
  const Scene t = build_scene(Preset::Terzaghi);
  EXPECT_EQ(t.particles.size(), 80u);
  EXPECT_EQ(t.grid.cell_count(), 160);
  EXPECT_EQ(t.integ.regime, Regime::QuasiStatic);
  EXPECT_NEAR(t.c_v, 1.8e-5, 1e-15);
  EXPECT_NEAR(t.materials[0].mobility0() * t.materials[0].constrained_modulus(), 1.8e-5, 1e-15);
  EXPECT_EQ(t.sample_nodes.size(), 41u);

  const Scene f = build_scene(Preset::Footing);
  EXPECT_EQ(f.integ.regime, Regime::Dynamic);
  EXPECT_DOUBLE_EQ(f.integ.dt, 1e-3);
  EXPECT_EQ(f.probes.size(), 3u);

  const Scene w = build_scene(Preset::SelfWeight);
  ASSERT_TRUE(w.hydro_top.has_value());

  SceneOverrides o;
  o.scale = 0.25;
  const Scene i = build_scene(Preset::Impact, o);
  EXPECT_EQ(i.grid.nx, 25);
  const Vec2 P = total_momentum(i.particles, i.materials);
  EXPECT_NEAR(P.x, 0.0, 1e-12);
  EXPECT_NEAR(P.y, 0.0, 1e-12);
  EXPECT_EQ(i.sample_nodes.size(), 26u);

  const Scene full = build_scene(Preset::Impact);
  EXPECT_NEAR(static_cast<double>(full.particles.size()) / 2.0, 7860.0, 78.6);
}

TEST(Scenarios, OverridesAndErrors) {
  SceneOverrides o;
  o.dt = 0.05;
  o.steps = 4;
  o.stabilized = false;
  o.kozeny_carman = true;
  const Scene t = build_scene(Preset::Terzaghi, o);
  EXPECT_DOUBLE_EQ(t.t_end, 0.2);
  EXPECT_FALSE(t.stabilized);
  EXPECT_TRUE(t.materials[0].kozeny_carman);
  EXPECT_EQ(parse_preset("footing"), Preset::Footing);
  EXPECT_THROW(parse_preset("dam"), ConfigError);
  o = {};
  o.scale = -1.0;
  EXPECT_THROW(build_scene(Preset::Footing, o), ConfigError);
  o = {};
  o.steps = 0;
  EXPECT_THROW(build_scene(Preset::Footing, o), ConfigError);
  o = {};
  o.level = 3;
  EXPECT_THROW(build_scene(Preset::Terzaghi, o), ConfigError);
  o = {};
  o.phi0 = 1.5;
  EXPECT_THROW(build_scene(Preset::Footing, o), ConfigError);
}

TEST(Scenarios, ExcessPressure) {
  Scene s;
  s.rho_f_g = 9810.0;
  EXPECT_DOUBLE_EQ(s.excess_pressure(100.0, {0.0, 0.5}), 100.0);
  s.hydro_top = 1.0;
  EXPECT_DOUBLE_EQ(s.excess_pressure(4905.0, {0.0, 0.5}), 0.0);
}

// The discs fly freely before contact: no excess pore pressure at the
// probe particles and momentum stays zero.
TEST(Scenarios, ImpactBeforeContact) {
  SceneOverrides o;
  o.scale = 0.25;
  o.steps = 6;
  Simulation sim(build_scene(Preset::Impact, o));
  while (!sim.finished()) sim.advance();
  const Scene& s = sim.scene();
  for (const auto& pr : s.probes) {
    const auto& mp = sim.particles()[sim.nearest_particle(pr.x + sim.time() * (pr.name == "A" ? Vec2{1.0, 1.0} : Vec2{-1.0, -1.0}))];
    EXPECT_LT(std::abs(mp.p), 1e-3) << pr.name;
  }
  const Vec2 P = total_momentum(sim.particles(), s.materials);
  EXPECT_LT(norm(P), 1e-9);
}
