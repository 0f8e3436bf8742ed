#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stabmpm/assembly.hpp"
#include "stabmpm/linear_solvers.hpp"

namespace stabmpm {

struct NewtonOptions {
  double rel_tol = 1e-8;
  double abs_floor = 1e-14;
  int max_iters = 25;
  // Also converged once |R| <= noise_factor * residual_noise_floor (0 disables).
  double noise_factor = 10.0;
  int max_backtracks = 12;  // step halvings when an update makes the state inadmissible
  SolverKind solver = SolverKind::Direct;
  KrylovOptions krylov;

  bool operator==(const NewtonOptions&) const = default;
};

struct SolveReport {
  long step = 0;
  std::vector<double> rel_residual;  // |R^k| / |R^0|, k = 0..
  std::vector<int> krylov_iters;     // per linear solve, aligned with rel_residual[k]
  bool converged = false;
  double abs_residual0 = 0.0;
  double noise_floor = 0.0;      // absolute, already multiplied by noise_factor
  bool at_noise_floor = false;   // converged on the noise floor, not on rel_tol
  int backtracks = 0;
  std::vector<std::string> warnings;

  int iterations() const { return static_cast<int>(rel_residual.size()) - 1; }
};

// Newton on the trial state, which holds the initial guess on entry (with
// prescribed values already in place) and the converged state on success.
// Throws NonConvergence (carrying the partial report in its message) after
// max_iters or on a non-finite residual; linear-solve failures propagate as
// LinearSolveError.
SolveReport newton_solve(const AssemblyContext& ctx, TrialState& trial, const NewtonOptions& opt, long step = 0);

// Called after every linear solve for diagnostics (tests, solver comparisons).
using LinearSolveHook = std::function<void(const BlockSystem&, const LinearSolveResult&)>;
SolveReport newton_solve(const AssemblyContext& ctx, TrialState& trial, const NewtonOptions& opt, long step,
                         const LinearSolveHook& hook);

}  // namespace stabmpm
