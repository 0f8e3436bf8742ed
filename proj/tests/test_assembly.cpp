#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "stabmpm/assembly.hpp"
#include "stabmpm/simulation.hpp"
#include "support.hpp"

using namespace stabmpm;
using stabmpm::testing::PatchOptions;
using stabmpm::testing::patch_scene;
using stabmpm::testing::randomize;
using stabmpm::testing::randomize_trial;

namespace {

Eigen::MatrixXd dense(const SpMat& m) { return Eigen::MatrixXd(m); }

double max_abs_diff(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return (dense(a) - dense(b)).cwiseAbs().maxCoeff();
}

struct Prepared {
  std::unique_ptr<Simulation> sim;
  std::unique_ptr<StepProblem> prob;
};

Prepared prepared_patch(const PatchOptions& po, unsigned seed, JacobianMode mode = JacobianMode::Frozen) {
  Scene s = patch_scene(po);
  randomize(s, seed);
  Prepared out;
  out.sim = std::make_unique<Simulation>(std::move(s));
  RunOptions ro;
  ro.mode = mode;
  out.prob = out.sim->prepare(out.sim->next_dt(), ro);
  randomize_trial(*out.prob, seed + 1);
  return out;
}

}  // namespace

// Frozen mode only drops momentum-row terms of A; every other block agrees.
TEST(Assembly, FrozenAndConsistentShareCouplingBlocks) {
  for (Regime regime : {Regime::Dynamic, Regime::QuasiStatic}) {
    PatchOptions po;
    po.regime = regime;
    Prepared a = prepared_patch(po, 21, JacobianMode::Frozen);
    Prepared b = prepared_patch(po, 21, JacobianMode::Consistent);
    const BlockSystem sa = assemble_jacobian(a.prob->ctx, a.prob->trial);
    const BlockSystem sb = assemble_jacobian(b.prob->ctx, b.prob->trial);
    EXPECT_EQ((sa.residual() - sb.residual()).norm(), 0.0);
    const double s1 = dense(sb.B1).cwiseAbs().maxCoeff();
    const double s2 = dense(sb.B2).cwiseAbs().maxCoeff();
    EXPECT_LE(max_abs_diff(sa.B1, sb.B1), 1e-12 * s1);
    EXPECT_LE(max_abs_diff(sa.B2, sb.B2), 1e-12 * s2);
    EXPECT_LE(max_abs_diff(sa.C, sb.C), 1e-12 * std::max(1e-300, dense(sb.C).cwiseAbs().maxCoeff()));
    EXPECT_LE(max_abs_diff(sa.C_stab, sb.C_stab), 0.0);
    if (regime == Regime::QuasiStatic) EXPECT_LE(max_abs_diff(sa.A, sb.A), 1e-12 * dense(sb.A).cwiseAbs().maxCoeff());
  }
}

// The projection term is a weighted Gram matrix of S - mean(S): symmetric,
// positive semidefinite and blind to a uniform pressure rate.
TEST(Assembly, StabilizationBlockStructure) {
  PatchOptions po;
  po.cells = 3;
  Prepared a = prepared_patch(po, 3);
  const BlockSystem s = assemble_jacobian(a.prob->ctx, a.prob->trial);
  ASSERT_TRUE(s.has_stab);
  const Eigen::MatrixXd Cs = dense(s.C_stab);
  const double scale = Cs.cwiseAbs().maxCoeff();
  ASSERT_GT(scale, 0.0);
  EXPECT_LE((Cs - Cs.transpose()).cwiseAbs().maxCoeff(), 1e-14 * scale);
  EXPECT_LE((Cs * Eigen::VectorXd::Ones(s.n_p)).cwiseAbs().maxCoeff(), 1e-12 * scale);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Cs);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * scale);
  // Darcy block is symmetric too (mobility does not depend on p)
  const Eigen::MatrixXd C = dense(s.C);
  EXPECT_LE((C - C.transpose()).cwiseAbs().maxCoeff(), 1e-12 * C.cwiseAbs().maxCoeff());
}

// R_stab is affine in P, so its central difference is exact up to rounding.
TEST(Assembly, StabilizationResidualMatchesBlock) {
  for (Regime regime : {Regime::Dynamic, Regime::QuasiStatic}) {
    PatchOptions po;
    po.regime = regime;
    Prepared a = prepared_patch(po, 8);
    BlockSystem s0;
    assemble_stabilization(a.prob->ctx, a.prob->trial, s0);
    const DofMap& d = a.prob->dofs;
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec dp = Vec::Zero(d.size());
    for (int i = d.n_u; i < d.size(); ++i) dp[i] = 1e3 * u(rng);
    TrialState t = a.prob->trial;
    add_increment(d, dp, t);
    BlockSystem s1;
    assemble_stabilization(a.prob->ctx, t, s1);
    const Vec lhs = s1.R_stab - s0.R_stab;
    const Vec rhs = s0.C_stab * dp.tail(d.n_p);
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * rhs.norm());
  }
}

// At rest with F = 1, p = 0 the momentum residual carries exactly the
// weight of the free patch: internal forces are self-equilibrated.
TEST(Assembly, FreePatchMomentumBalance) {
  PatchOptions po;
  po.constrained = false;
  po.cells = 3;
  Scene s = patch_scene(po);
  for (auto& mp : s.particles) mp.p = 2.5e4;  // uniform pressure exerts no net force
  const double M = [&] {
    double m = 0.0;
    for (const auto& mp : s.particles) m += mixture_density(mp.phi, s.materials[0]) * mp.V;
    return m;
  }();
  Simulation sim(std::move(s));
  auto prob = sim.prepare(sim.next_dt());
  for (auto& P : prob->trial.P) P = 2.5e4;
  const Vec R = assemble_momentum_residual(prob->ctx, prob->trial);
  double fx = 0.0, fy = 0.0;
  const DofMap& d = prob->dofs;
  for (std::size_t n = 0; n < d.u.size(); ++n) {
    if (d.u[n][0] >= 0) fx += R[d.u[n][0]];
    if (d.u[n][1] >= 0) fy += R[d.u[n][1]];
  }
  EXPECT_NEAR(fx, 0.0, 1e-9 * M * 9.81);
  EXPECT_NEAR(std::abs(fy), M * 9.81, 1e-9 * M * 9.81);
}

TEST(Assembly, UndrainedAndUnstabilizedBlocksVanish) {
  PatchOptions po;
  po.stabilized = false;
  Prepared a = prepared_patch(po, 4);
  a.prob->ctx.undrained = true;
  const BlockSystem s = assemble_jacobian(a.prob->ctx, a.prob->trial);
  EXPECT_FALSE(s.has_stab);
  EXPECT_EQ(s.C.nonZeros() == 0 ? 0.0 : dense(s.C).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.R_stab.norm(), 0.0);
  EXPECT_GT(residual_noise_floor(a.prob->ctx), 0.0);
}

TEST(Assembly, NodalPressureRate) {
  PatchOptions po;
  po.regime = Regime::QuasiStatic;
  Prepared a = prepared_patch(po, 6);
  const double pn = a.prob->prev.p[0];
  EXPECT_NEAR(nodal_pressure_rate(a.prob->ctx, 0, pn + 5.0), 5.0 / po.dt, 1e-9);
}

TEST(Assembly, LoadedFacesMustLieOnGridLines) {
  PatchOptions po;
  Scene s = patch_scene(po);
  BoundaryCondition t;
  t.kind = BcKind::Traction;
  t.vector_value = {0.0, -1.0};
  t.box = Box{0.0, 0.5, 0.5, 0.5};
  EXPECT_EQ(resolve_loaded_faces(s.grid, s.particles, {t}).size(), 4u);
  t.box = Box{0.0, 0.5, 0.3, 0.3};
  EXPECT_THROW(resolve_loaded_faces(s.grid, s.particles, {t}), ConfigError);
  t.box = Box{0.0, 0.5, 0.0, 0.5};
  EXPECT_THROW(resolve_loaded_faces(s.grid, s.particles, {t}), ConfigError);
}

// A traction on the top face integrates to the load times the length.
TEST(Assembly, NeumannForceTotal) {
  PatchOptions po;
  Scene s = patch_scene(po);
  BoundaryCondition t;
  t.kind = BcKind::Traction;
  t.vector_value = {0.0, -1e3};
  t.box = Box{0.0, 0.25, 0.5, 0.5};
  const std::vector<BoundaryCondition> bcs{t};
  const auto faces = resolve_loaded_faces(s.grid, s.particles, bcs);
  const NeumannContribution nc = apply_neumann(s.grid, s.particles, bcs, faces, 0.0);
  Vec2 F{0.0, 0.0};
  for (const auto& f : nc.force) F += f;
  EXPECT_NEAR(std::abs(F.y), 250.0, 1e-9);
  EXPECT_NEAR(F.x, 0.0, 1e-12);
}
