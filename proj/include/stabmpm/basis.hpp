#pragma once

// Grid basis functions seen from a material point: linear hats (original MPM)
// and uGIMP weights, the influence-domain overlap fractions used by the
// element projection, and the per-step transfer plan.

#include <array>
#include <vector>

#include "stabmpm/grid.hpp"
#include "stabmpm/tensor.hpp"

namespace stabmpm {

enum class BasisKind { Linear, GIMP };

const char* to_string(BasisKind k);

double hat(double xi, double h);
double hat_gradient(double xi, double h);

// uGIMP weight of a node at offset xi from the particle centre (unclipped).
// Throws UnsupportedDomain when lp > h/2.
double gimp_weight_1d(double xi, double lp, double h);
double gimp_gradient_1d(double xi, double lp, double h);

// Weight and gradient of the node at x_node for a particle occupying [a, b]
// (already clipped to the grid): the mean of the hat over [a, b] and the
// mean of its derivative.
struct Weight1d {
  double S, dS;
};
Weight1d gimp_interval(double a, double b, double x_node, double h);

// Fraction of [a, b] inside [c0, c1].
double overlap_fraction(double a, double b, double c0, double c1);

constexpr int kMaxNodes = 9;  // 3 x 3 for lp <= h/2
constexpr int kMaxCells = 4;

struct ParticleStencil {
  int n_nodes = 0;
  std::array<int, kMaxNodes> node{};
  std::array<double, kMaxNodes> S{};
  std::array<Vec2, kMaxNodes> dS{};  // gradient w.r.t. the configuration at t_n
  int n_cells = 0;
  std::array<int, kMaxCells> cell{};
  std::array<double, kMaxCells> overlap{};  // S0: fraction of the domain in each cell
  int home_cell = -1;
};

struct TransferPlan {
  BasisKind kind = BasisKind::GIMP;
  std::vector<ParticleStencil> stencils;
  std::vector<char> node_active;
  std::vector<std::vector<std::pair<int, double>>> cell_members;  // (particle, overlap)
};

struct ParticleGeometry {
  Vec2 x;
  Vec2 lp;
};

// Nodes with a support weight sum_k S_k (4 lp_x lp_y) below
// kMinNodeWeight h^2 are left inactive; the stencils touching them are
// renormalized.
constexpr double kMinNodeWeight = 1e-2;

// Throws OutOfDomain for a centre outside the grid, UnsupportedDomain for a
// GIMP half-length above h/2 (beyond a 1e-9 h tolerance).
TransferPlan build_plan(const BackgroundGrid& grid, BasisKind kind, const std::vector<ParticleGeometry>& pts,
                        long step = -1, double min_node_weight = kMinNodeWeight);

// Element average of a particle field with weights W = V * overlap. Cells
// without any contributing particle get NaN (no stabilization there).
std::vector<double> element_average(const TransferPlan& plan, const std::vector<double>& volume,
                                    const std::vector<double>& values);

}  // namespace stabmpm
