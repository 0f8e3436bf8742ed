#pragma once

// Linear stage of the Newton iteration: sparse direct LU on the monolithic
// matrix, or BiCGStab right-preconditioned with an upper block-triangular
// preconditioner built from an approximate Schur complement.

#include <string>

#include "stabmpm/assembly.hpp"

namespace stabmpm {

enum class SolverKind { Direct, FixedStress };
// Approximate Schur complement for the Krylov preconditioner:
//   FixedStress: C + C_stab + rate * M_p / K_dr
//   Diagonal:    C + C_stab - B2 diag(A)^-1 B1
//   Auto:        FixedStress for quasi-static systems, Diagonal for dynamic ones
enum class SchurKind { FixedStress, Diagonal, Auto };

const char* to_string(SolverKind k);
const char* to_string(SchurKind k);

struct LinearSolveResult {
  Vec delta;  // increment for [U; P], i.e. solution of J delta = -R
  int krylov_iters = 0;
  double rel_residual = 0.0;  // |J delta + R| / |R|
  bool fell_back = false;     // Krylov stagnated and the direct solve was used
  std::string warning;
};

struct KrylovOptions {
  double rel_tol = 1e-8;  // relative to the equilibrated |R|
  int max_iters = 200;
  SchurKind schur = SchurKind::Auto;
  Regime regime = Regime::Dynamic;
  double rate = 1.0;  // d(rate)/d(value) of the integrator

  bool operator==(const KrylovOptions&) const = default;
};

// Solve J delta = -R with J = sys.monolithic(). Throws LinearSolveError
// naming the zero-pivot dof when the factorization breaks down.
LinearSolveResult linear_solve_direct(const BlockSystem& sys, const DofMap* dofs = nullptr,
                                      const BackgroundGrid* grid = nullptr);

// Same system through preconditioned BiCGStab on the row/column-equilibrated
// matrix (rel_tol applies to the equilibrated residual); falls back to the
// direct solve when the tolerance is not met within max_iters.
LinearSolveResult linear_solve_fixed_stress(const BlockSystem& sys, const KrylovOptions& opt,
                                            const DofMap* dofs = nullptr, const BackgroundGrid* grid = nullptr);

// 2-norm condition number of the row/column-equilibrated matrix. Dense SVD up
// to `dense_limit` unknowns, otherwise a 1-norm estimate of the LU inverse.
double condition_estimate(const SpMat& J, int dense_limit = 2500);

}  // namespace stabmpm
