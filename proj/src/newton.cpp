#include "stabmpm/newton.hpp"

#include <cmath>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

SolveReport newton_solve(const AssemblyContext& ctx, TrialState& trial, const NewtonOptions& opt, long step) {
  return newton_solve(ctx, trial, opt, step, nullptr);
}

SolveReport newton_solve(const AssemblyContext& ctx, TrialState& trial, const NewtonOptions& opt, long step,
                         const LinearSolveHook& hook) {
  SolveReport rep;
  rep.step = step;
  BlockSystem sys = assemble_jacobian(ctx, trial);
  double r0 = sys.residual().norm();
  rep.abs_residual0 = r0;
  rep.rel_residual.push_back(1.0);
  if (!std::isfinite(r0)) throw NonConvergence("non-finite initial residual at step " + std::to_string(step));
  rep.noise_floor = opt.noise_factor > 0.0 ? opt.noise_factor * residual_noise_floor(ctx) : 0.0;
  if (r0 < opt.abs_floor || r0 <= rep.noise_floor) {
    rep.converged = true;
    rep.krylov_iters.push_back(0);
    return rep;
  }
  for (int it = 0; it < opt.max_iters; ++it) {
    LinearSolveResult lin;
    if (opt.solver == SolverKind::Direct) {
      lin = linear_solve_direct(sys, ctx.dofs, ctx.grid);
    } else {
      KrylovOptions ko = opt.krylov;
      ko.regime = ctx.integ.regime;
      ko.rate = ctx.integ.rate_factor();
      lin = linear_solve_fixed_stress(sys, ko, ctx.dofs, ctx.grid);
    }
    if (!lin.warning.empty()) rep.warnings.push_back(lin.warning);
    if (hook) hook(sys, lin);
    rep.krylov_iters.push_back(lin.krylov_iters);
    // Halve the step while the trial state is inadmissible (inverted or
    // over-compacted material points).
    TrialState next = trial;
    double r = 0.0;
    double alpha = 1.0;
    for (int cut = 0;; ++cut) {
      next = trial;
      add_increment(*ctx.dofs, alpha * lin.delta, next);
      try {
        r = assemble_residual(ctx, next).residual().norm();
        break;
      } catch (const LinearSolveError&) {
        throw;
      } catch (const StepFailure&) {
        if (cut >= opt.max_backtracks) throw;
        alpha *= 0.5;
        ++rep.backtracks;
      }
    }
    trial = std::move(next);
    if (!std::isfinite(r)) throw NonConvergence("non-finite residual at step " + std::to_string(step));
    rep.rel_residual.push_back(r / r0);
    const bool rel_ok = r / r0 <= opt.rel_tol || r < opt.abs_floor;
    if (rel_ok || r <= rep.noise_floor) {
      rep.converged = true;
      rep.at_noise_floor = !rel_ok;
      rep.krylov_iters.push_back(0);
      return rep;
    }
    sys = assemble_jacobian(ctx, trial);
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << opt.max_iters << " iterations at step " << step << " (last ratio "
      << rep.rel_residual.back() << ")";
  throw NonConvergence(msg.str());
}

}  // namespace stabmpm
