#pragma once

// Material points: state, seeding, particle <-> node transfers and the
// end-of-step update (stage 3: state from the converged nodal solution,
// stage 4: convection and GIMP domain update).

#include <vector>

#include "stabmpm/basis.hpp"
#include "stabmpm/constitutive.hpp"
#include "stabmpm/grid.hpp"
#include "stabmpm/tensor.hpp"

namespace stabmpm {

struct MaterialPoint {
  Vec2 x, X;
  double V = 0.0, V0 = 0.0;
  Tensor2d F = Tensor2d::identity();
  Vec2 lp, lp0;
  Vec2 v, a;
  double p = 0.0, p_dot = 0.0, p_ddot = 0.0;
  double phi = 0.0;
  int material = 0;
  int tag = -1;
};

using Particles = std::vector<MaterialPoint>;

std::vector<ParticleGeometry> geometry(const Particles& mps);

// Regular n_x x n_y lattice in every cell of `region`, which must align
// with the grid lines.
Particles seed_lattice(const BackgroundGrid& grid, const Box& region, int n_x, int n_y, int material,
                       double phi0);

// Square lattice of spacing s at half offsets from the disc centre, keeping
// the points that fall inside the disc. Each point keeps the full lattice
// volume s^2.
Particles seed_disc(const BackgroundGrid& grid, Vec2 centre, double radius, double spacing, int material,
                    double phi0);

// Grid-resident nodal state of the last converged step.
struct NodalState {
  std::vector<Vec2> v, a;
  std::vector<double> p, p_dot, p_ddot;
  std::vector<char> valid;

  void resize(int n_nodes);
};

// Fill the nodes that are in `need` but not yet valid: v, a mass-weighted,
// p and its rates volume-weighted. Nodes not in `need` are invalidated.
void p2g_fill(const TransferPlan& plan, const Particles& mps, const std::vector<MaterialParams>& materials,
              const std::vector<char>& need, NodalState& nodal);

// Plain weighted transfers, f_i = sum S f_mp / sum S w (w = weights).
std::vector<double> p2g_scalar(const TransferPlan& plan, const std::vector<double>& f,
                               const std::vector<double>& weight, int n_nodes);
double g2p_scalar(const ParticleStencil& st, const std::vector<double>& nodal);
Vec2 g2p_vector(const ParticleStencil& st, const std::vector<Vec2>& nodal);

// Stage 3. `du` and `p` are full-grid nodal arrays; `rates` holds the nodal
// v, a, p_dot, p_ddot at t_{n+1}. Quasi-static runs pass dynamic = false and
// keep velocity/acceleration at zero.
void post_solution_update(const TransferPlan& plan, const std::vector<Vec2>& du, const std::vector<double>& p,
                          const NodalState& rates, bool dynamic, const std::vector<MaterialParams>& materials,
                          Particles& mps);

// Stage 4: x += du, lp = lp0 * diag(U) with F = R U, clamped to h/2.
void convect_and_update_domains(const TransferPlan& plan, const std::vector<Vec2>& du, const BackgroundGrid& grid,
                                Particles& mps, long step = -1);

double total_solid_mass(const Particles& mps, const std::vector<MaterialParams>& materials);
Vec2 total_momentum(const Particles& mps, const std::vector<MaterialParams>& materials);

}  // namespace stabmpm
