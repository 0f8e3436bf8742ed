#include "stabmpm/linear_solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

const char* to_string(SolverKind k) { return k == SolverKind::Direct ? "direct" : "fixed_stress"; }

const char* to_string(SchurKind k) {
  switch (k) {
    case SchurKind::FixedStress:
      return "fixed_stress";
    case SchurKind::Diagonal:
      return "diagonal";
    case SchurKind::Auto:
      return "auto";
  }
  return "?";
}

namespace {

using LU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

struct Equilibrated {
  SpMat J;
  Vec row, col;  // J_eq = diag(row) J diag(col)
};

Equilibrated equilibrate(const SpMat& J) {
  Equilibrated e;
  const int n = static_cast<int>(J.rows());
  e.row = Vec::Zero(n);
  e.col = Vec::Zero(J.cols());
  for (int k = 0; k < J.outerSize(); ++k)
    for (SpMat::InnerIterator it(J, k); it; ++it) e.row[it.row()] = std::max(e.row[it.row()], std::abs(it.value()));
  for (int i = 0; i < n; ++i) e.row[i] = e.row[i] > 0.0 ? 1.0 / e.row[i] : 1.0;
  for (int k = 0; k < J.outerSize(); ++k)
    for (SpMat::InnerIterator it(J, k); it; ++it)
      e.col[it.col()] = std::max(e.col[it.col()], std::abs(e.row[it.row()] * it.value()));
  for (int j = 0; j < J.cols(); ++j) e.col[j] = e.col[j] > 0.0 ? 1.0 / e.col[j] : 1.0;
  e.J = e.row.asDiagonal() * J * e.col.asDiagonal();
  e.J.makeCompressed();
  return e;
}

long zero_pivot_dof(const LU& lu) {
  const std::string msg = lu.lastErrorMessage();
  const auto pos = msg.find("ZERO COLUMN AT ");
  if (pos == std::string::npos) return -1;
  const long k = std::stol(msg.substr(pos + 15)) - 1;
  const auto& perm = lu.colsPermutation().indices();
  for (long j = 0; j < perm.size(); ++j)
    if (perm[j] == k) return j;
  return k;
}

[[noreturn]] void singular(const std::string& what, long dof, const DofMap* dofs, const BackgroundGrid* grid) {
  std::ostringstream os;
  os << what;
  if (dof >= 0) {
    os << " (zero pivot at ";
    if (dofs && grid) os << dofs->describe(dof, *grid);
    else os << "dof " << dof;
    os << ")";
  }
  throw LinearSolveError(os.str(), dof);
}

}  // namespace

LinearSolveResult linear_solve_direct(const BlockSystem& sys, const DofMap* dofs, const BackgroundGrid* grid) {
  LinearSolveResult out;
  const Vec R = sys.residual();
  const int n = static_cast<int>(R.size());
  if (n == 0) {
    out.delta = Vec();
    return out;
  }
  const SpMat J = sys.monolithic();
  const Equilibrated eq = equilibrate(J);
  LU lu;
  lu.analyzePattern(eq.J);
  lu.factorize(eq.J);
  if (lu.info() != Eigen::Success) singular("singular Jacobian: " + lu.lastErrorMessage(), zero_pivot_dof(lu), dofs, grid);

  const double rnorm = R.norm();
  auto solve = [&](const Vec& rhs) -> Vec {
    Vec y = lu.solve(eq.row.cwiseProduct(rhs));
    return eq.col.cwiseProduct(y);
  };
  out.delta = solve(-R);
  if (!out.delta.allFinite()) singular("linear solve produced non-finite values", -1, dofs, grid);
  auto rel = [&]() { return rnorm > 0.0 ? (J * out.delta + R).norm() / rnorm : (J * out.delta).norm(); };
  out.rel_residual = rel();
  for (int k = 0; k < 3 && out.rel_residual > 1e-12; ++k) {
    out.delta += solve(-(J * out.delta + R));
    out.rel_residual = rel();
  }
  if (!(out.rel_residual <= 1e-6)) {
    std::ostringstream os;
    os << "direct solve residual " << out.rel_residual << " after refinement";
    singular(os.str(), -1, dofs, grid);
  }
  if (out.rel_residual > 1e-12) {
    std::ostringstream os;
    os << "direct solve residual " << out.rel_residual << " above 1e-12 (ill-conditioned system, cond ~ "
       << condition_estimate(J) << ")";
    out.warning = os.str();
  }
  return out;
}

namespace {

// Upper block-triangular right preconditioner:
//   y_p = S^-1 r_p,  y_u = A^-1 (r_u - B1 y_p).
class BlockPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  BlockPreconditioner() = default;

  void setup(const BlockSystem* sys, std::shared_ptr<LU> A, std::shared_ptr<LU> S) {
    sys_ = sys;
    A_ = std::move(A);
    S_ = std::move(S);
  }

  template <class M>
  BlockPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M>
  BlockPreconditioner& factorize(const M&) { return *this; }
  template <class M>
  BlockPreconditioner& compute(const M&) { return *this; }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

  template <class Rhs>
  Vec solve(const Rhs& r) const {
    const int nu = sys_->n_u, np = sys_->n_p;
    Vec y(nu + np);
    if (np > 0) y.tail(np) = S_->solve(Vec(r.tail(np)));
    if (nu > 0) {
      Vec ru = r.head(nu);
      if (np > 0) ru -= sys_->B1 * y.tail(np);
      y.head(nu) = A_->solve(ru);
    }
    return y;
  }

 private:
  const BlockSystem* sys_ = nullptr;
  std::shared_ptr<LU> A_, S_;
};

SpMat schur_approximation(const BlockSystem& sys, const KrylovOptions& opt) {
  SchurKind kind = opt.schur;
  if (kind == SchurKind::Auto) kind = opt.regime == Regime::Dynamic ? SchurKind::Diagonal : SchurKind::FixedStress;
  SpMat S = sys.C;
  if (sys.has_stab) S += sys.C_stab;
  if (kind == SchurKind::FixedStress) {
    S += opt.rate * sys.Mp_over_K;
  } else {
    Vec dinv = sys.A.diagonal();
    for (int i = 0; i < dinv.size(); ++i) dinv[i] = dinv[i] != 0.0 ? 1.0 / dinv[i] : 0.0;
    SpMat scaled_B1 = dinv.asDiagonal() * sys.B1;
    S -= SpMat(sys.B2 * scaled_B1);
  }
  S.makeCompressed();
  return S;
}

// Blocks of diag(row) J diag(col), split at n_u.
BlockSystem scale_blocks(const BlockSystem& sys, const Equilibrated& eq) {
  const int nu = sys.n_u, np = sys.n_p;
  const Vec ru = eq.row.head(nu), rp = eq.row.tail(np), cu = eq.col.head(nu), cp = eq.col.tail(np);
  auto sc = [](const Vec& r, const SpMat& m, const Vec& c) {
    SpMat out = r.asDiagonal() * m * c.asDiagonal();
    out.makeCompressed();
    return out;
  };
  BlockSystem s;
  s.n_u = nu;
  s.n_p = np;
  s.has_stab = sys.has_stab;
  s.A = sc(ru, sys.A, cu);
  s.B1 = sc(ru, sys.B1, cp);
  s.B2 = sc(rp, sys.B2, cu);
  s.C = sc(rp, sys.C, cp);
  if (sys.has_stab) s.C_stab = sc(rp, sys.C_stab, cp);
  s.Mp_over_K = sc(rp, sys.Mp_over_K, cp);
  return s;
}

}  // namespace

LinearSolveResult linear_solve_fixed_stress(const BlockSystem& sys, const KrylovOptions& opt, const DofMap* dofs,
                                            const BackgroundGrid* grid) {
  const Vec R = sys.residual();
  if (R.size() == 0) return {};
  const double rnorm = R.norm();
  if (rnorm == 0.0) {
    LinearSolveResult zero;
    zero.delta = Vec::Zero(R.size());
    return zero;
  }
  // Krylov runs on the equilibrated system so that the tolerance sees the
  // mass rows as well as the (much larger) momentum rows.
  const SpMat J = sys.monolithic();
  const Equilibrated eq = equilibrate(J);
  const BlockSystem ss = scale_blocks(sys, eq);
  auto A = std::make_shared<LU>();
  auto S = std::make_shared<LU>();
  if (ss.n_u > 0) {
    A->compute(ss.A);
    if (A->info() != Eigen::Success) singular("singular displacement block: " + A->lastErrorMessage(), -1, dofs, grid);
  }
  if (ss.n_p > 0) {
    S->compute(schur_approximation(ss, opt));
    if (S->info() != Eigen::Success) singular("singular Schur approximation: " + S->lastErrorMessage(), -1, dofs, grid);
  }

  Eigen::BiCGSTAB<SpMat, BlockPreconditioner> solver;
  solver.preconditioner().setup(&ss, A, S);
  solver.setTolerance(opt.rel_tol);
  solver.setMaxIterations(opt.max_iters);
  solver.compute(eq.J);
  LinearSolveResult out;
  const Vec y = solver.solve(-eq.row.cwiseProduct(R));
  out.delta = eq.col.cwiseProduct(y);
  out.krylov_iters = static_cast<int>(solver.iterations());
  out.rel_residual = (J * out.delta + R).norm() / rnorm;
  const double scaled_rel = (eq.J * y + eq.row.cwiseProduct(R)).norm() / eq.row.cwiseProduct(R).norm();
  if (solver.info() != Eigen::Success || !out.delta.allFinite() || !(scaled_rel <= 10.0 * opt.rel_tol)) {
    std::ostringstream os;
    os << "Krylov stagnated after " << out.krylov_iters << " iterations (relative residual " << out.rel_residual
       << "); using the direct solve";
    LinearSolveResult d = linear_solve_direct(sys, dofs, grid);
    d.krylov_iters = out.krylov_iters;
    d.fell_back = true;
    d.warning = os.str() + (d.warning.empty() ? "" : "; " + d.warning);
    return d;
  }
  return out;
}

double condition_estimate(const SpMat& J, int dense_limit) {
  const int n = static_cast<int>(J.rows());
  if (n == 0) return 1.0;
  const Equilibrated eq = equilibrate(J);
  if (n <= dense_limit) {
    const Eigen::MatrixXd D(eq.J);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
    const Vec s = svd.singularValues();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
  }
  // Hager's 1-norm estimate of |J^-1|_1 times |J|_1.
  LU lu;
  lu.compute(eq.J);
  if (lu.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  double norm1 = 0.0;
  for (int k = 0; k < eq.J.outerSize(); ++k) {
    double c = 0.0;
    for (SpMat::InnerIterator it(eq.J, k); it; ++it) c += std::abs(it.value());
    norm1 = std::max(norm1, c);
  }
  const SpMat Jt = eq.J.transpose();
  LU lut;
  lut.compute(Jt);
  Vec x = Vec::Constant(n, 1.0 / n);
  double est = 0.0;
  for (int it = 0; it < 5; ++it) {
    const Vec y = lu.solve(x);
    const double ny = y.lpNorm<1>();
    if (!std::isfinite(ny)) return std::numeric_limits<double>::infinity();
    if (ny <= est && it > 0) break;
    est = ny;
    Vec xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Vec z = lut.solve(xi);
    Eigen::Index j;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x) && it > 0) break;
    x.setZero();
    x[j] = 1.0;
  }
  return est * norm1;
}

}  // namespace stabmpm
