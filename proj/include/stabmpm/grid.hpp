#pragma once

// Fixed structured background grid, boundary conditions and the dof map.

#include <array>
#include <string>
#include <vector>

#include "stabmpm/tensor.hpp"

namespace stabmpm {

struct BackgroundGrid {
  Vec2 origin{0.0, 0.0};
  double h = 1.0;
  int nx = 0, ny = 0;  // cells per axis

  // Throws ConfigError unless extent is a positive multiple of h (1e-9 relative).
  static BackgroundGrid build(Vec2 origin, Vec2 extent, double h);

  int node_count() const { return (nx + 1) * (ny + 1); }
  int cell_count() const { return nx * ny; }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  int cell_id(int i, int j) const { return j * nx + i; }
  std::array<int, 2> node_ij(int id) const { return {id % (nx + 1), id / (nx + 1)}; }
  std::array<int, 2> cell_ij(int id) const { return {id % nx, id / nx}; }
  Vec2 node_pos(int id) const;
  Vec2 upper() const { return {origin.x + nx * h, origin.y + ny * h}; }
  bool contains(const Vec2& x, double tol = 1e-12) const;

  // Cell holding x; points on a face go to the lower-index cell.
  int locate_cell(const Vec2& x) const;
};

// Axis-aligned box; a degenerate box is a segment or a point. Inclusive with
// a small tolerance (1e-9 h) so nodes lying on the edges are selected.
struct Box {
  double x0 = -1e300, x1 = 1e300, y0 = -1e300, y1 = 1e300;
  bool contains(const Vec2& p, double tol) const;
};

struct Amplitude {
  enum class Kind { Constant, OneMinusCos };
  Kind kind = Kind::Constant;
  double omega = 0.0;  // rad/s for OneMinusCos

  double operator()(double t) const;
};

enum class BcKind { FixedDisplacement, Roller, Traction, Pressure, Flux, Impermeable };

const char* to_string(BcKind k);

struct BoundaryCondition {
  BcKind kind = BcKind::FixedDisplacement;
  Box box;
  int particle_tag = -1;      // >= 0 selects by particle tag instead of box (pressure only)
  bool free_surface = false;  // pressure: only nodes bordering an empty cell
  int component = -1;         // roller: constrained axis
  Vec2 vector_value{0.0, 0.0};  // displacement or traction
  double scalar_value = 0.0;    // pressure or outward flux
  Amplitude amplitude;
};

// Per-node Dirichlet data resolved for one step.
struct NodalConstraints {
  std::vector<std::array<char, 2>> u_fixed;
  std::vector<std::array<double, 2>> u_value;  // prescribed displacement at t_{n+1}
  std::vector<char> p_fixed;
  std::vector<double> p_value;

  void resize(int n_nodes);
};

// Segregated numbering: all free u components first, then all free p.
struct DofMap {
  std::vector<std::array<int, 2>> u;  // -1 if inactive or constrained
  std::vector<int> p;
  std::vector<char> active;
  int n_u = 0, n_p = 0;

  int size() const { return n_u + n_p; }
  int active_count() const;
  // Inverse lookup for diagnostics: "node 12 (i=3, j=1) field p".
  std::string describe(long dof, const BackgroundGrid& grid) const;
};

struct Binning {
  std::vector<int> cell_of;               // per particle
  std::vector<std::vector<int>> members;  // per cell, ascending particle index
};

// Throws OutOfDomain naming the particle (and step when given).
Binning bin_particles(const BackgroundGrid& grid, const std::vector<Vec2>& positions, long step = -1);

DofMap activate_and_number(const BackgroundGrid& grid, const std::vector<char>& active,
                           const NodalConstraints& constraints);

// Rejects Dirichlet/Neumann selectors of the same field overlapping on a set
// of positive measure. Touching endpoints are allowed.
void validate_boundary_overlap(const std::vector<BoundaryCondition>& bcs);

}  // namespace stabmpm
