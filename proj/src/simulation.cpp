#include "stabmpm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

Simulation::Simulation(Scene scene) : scene_(std::move(scene)) {
  for (const auto& m : scene_.materials) m.validate();
  scene_.integ.validate();
  for (const auto& mp : scene_.particles)
    if (mp.material < 0 || mp.material >= static_cast<int>(scene_.materials.size()))
      throw ConfigError("particle refers to an undefined material");
  validate_boundary_overlap(scene_.bcs);
  faces_ = resolve_loaded_faces(scene_.grid, scene_.particles, scene_.bcs);
  nodal_.resize(scene_.grid.node_count());
  dt_ = scene_.integ.dt;
}

namespace {

// Active nodes next to an in-grid cell that holds no particle centre.
std::vector<char> free_surface_nodes(const BackgroundGrid& g, const TransferPlan& plan) {
  std::vector<char> occupied(g.cell_count(), 0);
  for (const auto& st : plan.stencils) occupied[st.home_cell] = 1;
  std::vector<char> out(g.node_count(), 0);
  for (int n = 0; n < g.node_count(); ++n) {
    if (!plan.node_active[n]) continue;
    const auto ij = g.node_ij(n);
    for (int dj = -1; dj <= 0 && !out[n]; ++dj) {
      for (int di = -1; di <= 0; ++di) {
        const int ci = ij[0] + di, cj = ij[1] + dj;
        if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
        if (!occupied[g.cell_id(ci, cj)]) {
          out[n] = 1;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<StepProblem> Simulation::prepare(double dt, const RunOptions& opt) const {
  const BackgroundGrid& g = scene_.grid;
  const Particles& mps = scene_.particles;
  const int nn = g.node_count();
  auto prob = std::make_unique<StepProblem>();
  prob->t_n = t_;
  prob->dt = dt;
  prob->step = step_;
  prob->plan = build_plan(g, scene_.basis, geometry(mps), step_);
  const auto& active = prob->plan.node_active;

  prob->prev = nodal_;
  p2g_fill(prob->plan, mps, scene_.materials, active, prob->prev);

  const double t1 = t_ + dt;
  NodalConstraints& cons = prob->constraints;
  cons.resize(nn);
  const double tol = 1e-9 * g.h;
  std::vector<char> surface;
  for (const auto& bc : scene_.bcs) {
    if (bc.kind == BcKind::FixedDisplacement || bc.kind == BcKind::Roller) {
      const double a0 = bc.amplitude(t_), a1 = bc.amplitude(t1);
      for (int n = 0; n < nn; ++n) {
        if (!active[n] || !bc.box.contains(g.node_pos(n), tol)) continue;
        for (int c = 0; c < 2; ++c) {
          if (bc.kind == BcKind::Roller && c != bc.component) continue;
          const double inc = bc.kind == BcKind::Roller ? 0.0 : bc.vector_value[c] * (a1 - a0);
          cons.u_fixed[n][c] = 1;
          cons.u_value[n][c] = inc;
        }
      }
    } else if (bc.kind == BcKind::Pressure) {
      const double value = bc.scalar_value * bc.amplitude(t1);
      if (bc.particle_tag >= 0) {
        for (std::size_t k = 0; k < mps.size(); ++k) {
          if (mps[k].tag != bc.particle_tag) continue;
          const auto& st = prob->plan.stencils[k];
          for (int q = 0; q < st.n_nodes; ++q) {
            if (st.S[q] <= 0.0) continue;
            cons.p_fixed[st.node[q]] = 1;
            cons.p_value[st.node[q]] = value;
          }
        }
        continue;
      }
      if (bc.free_surface && surface.empty()) surface = free_surface_nodes(g, prob->plan);
      for (int n = 0; n < nn; ++n) {
        if (!active[n] || !bc.box.contains(g.node_pos(n), tol)) continue;
        if (bc.free_surface && !surface[n]) continue;
        cons.p_fixed[n] = 1;
        cons.p_value[n] = value;
      }
    }
  }
  prob->dofs = activate_and_number(g, active, cons);
  prob->neumann = apply_neumann(g, mps, scene_.bcs, faces_, t1);

  // constrained components at rest stay at rest
  for (int n = 0; n < nn; ++n) {
    if (!active[n]) continue;
    for (int c = 0; c < 2; ++c) {
      if (cons.u_fixed[n][c] && cons.u_value[n][c] == 0.0) {
        prob->prev.v[n][c] = 0.0;
        prob->prev.a[n][c] = 0.0;
      }
    }
  }

  AssemblyContext& ctx = prob->ctx;
  ctx.grid = &scene_.grid;
  ctx.plan = &prob->plan;
  ctx.particles = &scene_.particles;
  ctx.materials = &scene_.materials;
  ctx.prev = &prob->prev;
  ctx.dofs = &prob->dofs;
  ctx.neumann = &prob->neumann;
  ctx.integ = scene_.integ;
  ctx.integ.dt = dt;
  ctx.stabilized = scene_.stabilized;
  ctx.mode = opt.mode;
  ctx.undrained = scene_.undrained_first_step && step_ == 0;
  if (ctx.stabilized) ctx.tau = compute_cell_tau(g, prob->plan, mps, scene_.materials, ctx.integ, ctx.undrained);

  TrialState& tr = prob->trial;
  tr.U.assign(nn, Vec2{});
  tr.P.assign(nn, 0.0);
  for (int n = 0; n < nn; ++n) {
    if (!active[n]) continue;
    for (int c = 0; c < 2; ++c)
      if (cons.u_fixed[n][c]) tr.U[n][c] = cons.u_value[n][c];
    tr.P[n] = cons.p_fixed[n] ? cons.p_value[n] : prob->prev.p[n];
  }
  return prob;
}

void Simulation::commit(const StepProblem& prob) {
  const int nn = scene_.grid.node_count();
  const auto& active = prob.plan.node_active;
  const IntegratorConfig& in = prob.ctx.integ;
  const bool dynamic = in.regime == Regime::Dynamic;
  NodalState rates;
  rates.resize(nn);
  for (int n = 0; n < nn; ++n) {
    if (!active[n]) continue;
    const Vec2 U = prob.trial.U[n];
    const double P = prob.trial.P[n];
    if (dynamic) {
      for (int c = 0; c < 2; ++c) {
        const Rates<double> r = newmark_rates(U[c], prob.prev.v[n][c], prob.prev.a[n][c], in);
        rates.v[n][c] = r.first;
        rates.a[n][c] = r.second;
      }
      const Rates<double> rp =
          newmark_pressure_rates(P, prob.prev.p[n], prob.prev.p_dot[n], prob.prev.p_ddot[n], in);
      rates.p_dot[n] = rp.first;
      rates.p_ddot[n] = rp.second;
    } else {
      rates.v[n] = implicit_euler_rate(U, in.dt);
      rates.p_dot[n] = implicit_euler_rate(P - prob.prev.p[n], in.dt);
    }
    rates.p[n] = P;
    rates.valid[n] = 1;
  }
  Particles next = scene_.particles;
  post_solution_update(prob.plan, prob.trial.U, prob.trial.P, rates, dynamic, scene_.materials, next);
  convect_and_update_domains(prob.plan, prob.trial.U, scene_.grid, next, prob.step);
  scene_.particles = std::move(next);
  nodal_ = std::move(rates);
}

StepRecord Simulation::advance(const RunOptions& opt, const LinearSolveHook& hook) {
  if (finished()) throw InvalidState("simulation already reached t_end");
  StepRecord rec;
  rec.step = step_;
  const double remaining = scene_.t_end - t_;
  double dt = dt_;
  if (dt > remaining * (1.0 - 1e-12)) dt = remaining;
  for (;;) {
    try {
      auto prob = prepare(dt, opt);
      rec.report = newton_solve(prob->ctx, prob->trial, opt.newton, step_, hook);
      commit(*prob);
      break;
    } catch (const StepFailure& e) {
      rec.failures.emplace_back(e.what());
      if (rec.cuts >= opt.max_cuts) {
        std::ostringstream msg;
        msg << "step " << step_ << " failed after " << rec.cuts << " time-step cuts: " << e.what();
        throw NonConvergence(msg.str());
      }
      ++rec.cuts;
      dt *= 0.5;
    }
  }
  rec.dt = dt;
  t_ = rec.cuts == 0 && dt == remaining ? scene_.t_end : t_ + dt;
  rec.t = t_;
  ++step_;
  // fixed-step runs return to the nominal step after a cut
  if (scene_.integ.dt_growth != 1.0) dt_ = dt * scene_.integ.dt_growth;
  return rec;
}

std::vector<double> Simulation::sampled_pressure(std::vector<Vec2>* positions) const {
  std::vector<double> out;
  if (positions) positions->clear();
  for (int n : scene_.sample_nodes) {
    if (!nodal_.valid[n]) continue;
    out.push_back(nodal_.p[n]);
    if (positions) positions->push_back(scene_.grid.node_pos(n));
  }
  return out;
}

int Simulation::nearest_particle(const Vec2& x) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scene_.particles.size(); ++k) {
    const Vec2 d = scene_.particles[k].x - x;
    const double r = d.x * d.x + d.y * d.y;
    if (r < bd) {
      bd = r;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace stabmpm
