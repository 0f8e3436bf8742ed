#pragma once

// Discrete residuals and block Jacobian of the coupled u-p system, integrated
// at the material points in the configuration of t_n.
//
// Unknowns: nodal displacement increment U over the step and nodal pressure
// P at t_{n+1}. Blocks follow the segregated dof ordering:
//
//   [ A   B1          ] [dU]     [R_mom         ]
//   [ B2  C + C_stab  ] [dP] = - [R_mass + R_stab]

#include <Eigen/Sparse>
#include <vector>

#include "stabmpm/basis.hpp"
#include "stabmpm/constitutive.hpp"
#include "stabmpm/grid.hpp"
#include "stabmpm/integrator.hpp"
#include "stabmpm/particles.hpp"

namespace stabmpm {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Frozen: density-volume product in the inertia term and the gradient/volume
// in the damping term are held at their current iterate values (not
// linearized). Consistent: every dependence is differentiated.
enum class JacobianMode { Frozen, Consistent };

struct BlockSystem {
  int n_u = 0, n_p = 0;
  SpMat A, B1, B2, C, C_stab;
  SpMat Mp_over_K;  // pressure mass matrix / drained modulus (preconditioner)
  Vec R_mom, R_mass, R_stab;
  bool has_stab = false;

  SpMat monolithic() const;
  Vec residual() const;
};

// A traction or flux carried by a particle face: the face normal to `axis`
// on side +1/-1, loaded over the face parameter range [s0, s1] in [-1, 1].
struct LoadedFace {
  int particle = -1;
  int axis = 1;
  int side = 1;
  double s0 = -1.0, s1 = 1.0;
  int bc = -1;
};

// Faces of the particles at their current positions that lie on the
// traction/flux segments. Throws ConfigError for a segment that is not a
// grid line or that no particle face touches.
std::vector<LoadedFace> resolve_loaded_faces(const BackgroundGrid& grid, const Particles& mps,
                                             const std::vector<BoundaryCondition>& bcs);

struct NeumannContribution {
  std::vector<Vec2> force;   // per node, added to R_mom
  std::vector<double> flux;  // per node, added to R_mass (outward flux positive)
};

// Dead loads evaluated at time t on the faces at the configuration of t_n,
// integrated with 2-point Gauss against the grid's bilinear hats.
NeumannContribution apply_neumann(const BackgroundGrid& grid, const Particles& mps,
                                  const std::vector<BoundaryCondition>& bcs, const std::vector<LoadedFace>& faces,
                                  double t);

struct AssemblyContext {
  const BackgroundGrid* grid = nullptr;
  const TransferPlan* plan = nullptr;
  const Particles* particles = nullptr;
  const std::vector<MaterialParams>* materials = nullptr;
  const NodalState* prev = nullptr;
  const DofMap* dofs = nullptr;
  const NeumannContribution* neumann = nullptr;
  IntegratorConfig integ;
  bool stabilized = false;
  std::vector<double> tau;  // per cell
  JacobianMode mode = JacobianMode::Frozen;
  bool undrained = false;  // mobility forced to zero
};

// Full-grid nodal trial fields (inactive nodes hold zeros).
struct TrialState {
  std::vector<Vec2> U;
  std::vector<double> P;
};

// Cell-wise tau from W-weighted cell averages of mobility and moduli at t_n.
std::vector<double> compute_cell_tau(const BackgroundGrid& grid, const TransferPlan& plan, const Particles& mps,
                                     const std::vector<MaterialParams>& materials, const IntegratorConfig& integ,
                                     bool undrained);

Vec assemble_momentum_residual(const AssemblyContext& ctx, const TrialState& trial);
Vec assemble_mass_residual(const AssemblyContext& ctx, const TrialState& trial);

// Residuals only (no Jacobian blocks).
BlockSystem assemble_residual(const AssemblyContext& ctx, const TrialState& trial);

// Residuals and all blocks.
BlockSystem assemble_jacobian(const AssemblyContext& ctx, const TrialState& trial);

// Stabilization part alone: fills R_stab, C_stab and has_stab of `sys`.
void assemble_stabilization(const AssemblyContext& ctx, const TrialState& trial, BlockSystem& sys);

// Nodal pressure rate at t_{n+1} for the trial pressure.
double nodal_pressure_rate(const AssemblyContext& ctx, int node, double P);

// Size of the rounding noise in |R| at the t_n configuration: machine
// epsilon times the constrained modulus times the per-dof sum of V |grad S|.
// Residuals below a small multiple of this cannot be reduced further.
double residual_noise_floor(const AssemblyContext& ctx);

// Add a monolithic increment (free dofs only) into the trial state.
void add_increment(const DofMap& dofs, const Vec& delta, TrialState& trial);

}  // namespace stabmpm
