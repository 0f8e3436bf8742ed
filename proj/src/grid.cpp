#include "stabmpm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

BackgroundGrid BackgroundGrid::build(Vec2 origin, Vec2 extent, double h) {
  if (!(h > 0.0)) throw ConfigError("grid: cell size must be positive");
  if (!(extent.x > 0.0) || !(extent.y > 0.0)) throw ConfigError("grid: extents must be positive");
  auto cells = [h](double len, const char* axis) {
    const double n = len / h;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
      std::ostringstream msg;
      msg << "grid: extent " << len << " along " << axis << " is not a multiple of h = " << h;
      throw ConfigError(msg.str());
    }
    return static_cast<int>(r);
  };
  BackgroundGrid g;
  g.origin = origin;
  g.h = h;
  g.nx = cells(extent.x, "x");
  g.ny = cells(extent.y, "y");
  return g;
}

Vec2 BackgroundGrid::node_pos(int id) const {
  const auto ij = node_ij(id);
  return {origin.x + ij[0] * h, origin.y + ij[1] * h};
}

bool BackgroundGrid::contains(const Vec2& x, double tol) const {
  const Vec2 hi = upper();
  const double t = tol * h;
  return x.x >= origin.x - t && x.x <= hi.x + t && x.y >= origin.y - t && x.y <= hi.y + t;
}

int BackgroundGrid::locate_cell(const Vec2& x) const {
  auto axis = [this](double s, int n) {
    int k = static_cast<int>(std::ceil(s)) - 1;
    return std::clamp(k, 0, n - 1);
  };
  return cell_id(axis((x.x - origin.x) / h, nx), axis((x.y - origin.y) / h, ny));
}

bool Box::contains(const Vec2& p, double tol) const {
  return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
}

double Amplitude::operator()(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::OneMinusCos:
      return 1.0 - std::cos(omega * t);
  }
  return 1.0;
}

const char* to_string(BcKind k) {
  switch (k) {
    case BcKind::FixedDisplacement:
      return "fixed";
    case BcKind::Roller:
      return "roller";
    case BcKind::Traction:
      return "traction";
    case BcKind::Pressure:
      return "pressure";
    case BcKind::Flux:
      return "flux";
    case BcKind::Impermeable:
      return "impermeable";
  }
  return "?";
}

void NodalConstraints::resize(int n) {
  u_fixed.assign(n, {0, 0});
  u_value.assign(n, {0.0, 0.0});
  p_fixed.assign(n, 0);
  p_value.assign(n, 0.0);
}

int DofMap::active_count() const { return static_cast<int>(std::count(active.begin(), active.end(), 1)); }

std::string DofMap::describe(long dof, const BackgroundGrid& grid) const {
  std::ostringstream os;
  for (int n = 0; n < static_cast<int>(p.size()); ++n) {
    const auto ij = grid.node_ij(n);
    for (int c = 0; c < 2; ++c) {
      if (u[n][c] == dof) {
        os << "node " << n << " (i=" << ij[0] << ", j=" << ij[1] << ") field u" << (c == 0 ? 'x' : 'y');
        return os.str();
      }
    }
    if (p[n] >= 0 && n_u + p[n] == dof) {
      os << "node " << n << " (i=" << ij[0] << ", j=" << ij[1] << ") field p";
      return os.str();
    }
  }
  os << "dof " << dof;
  return os.str();
}

Binning bin_particles(const BackgroundGrid& grid, const std::vector<Vec2>& positions, long step) {
  Binning b;
  b.cell_of.resize(positions.size());
  b.members.assign(grid.cell_count(), {});
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (!grid.contains(positions[k], 1e-9)) {
      std::ostringstream msg;
      msg << "particle " << k << " at " << positions[k] << " left the grid";
      if (step >= 0) msg << " at step " << step;
      throw OutOfDomain(msg.str());
    }
    const int c = grid.locate_cell(positions[k]);
    b.cell_of[k] = c;
    b.members[c].push_back(static_cast<int>(k));
  }
  return b;
}

DofMap activate_and_number(const BackgroundGrid& grid, const std::vector<char>& active,
                           const NodalConstraints& cons) {
  DofMap m;
  const int n = grid.node_count();
  m.u.assign(n, {-1, -1});
  m.p.assign(n, -1);
  m.active = active;
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (int c = 0; c < 2; ++c)
      if (!cons.u_fixed[i][c]) m.u[i][c] = m.n_u++;
  }
  for (int i = 0; i < n; ++i) {
    if (active[i] && !cons.p_fixed[i]) m.p[i] = m.n_p++;
  }
  return m;
}

namespace {

// Measure of the intersection of two boxes, in the dimension of the smaller.
bool positive_overlap(const Box& a, const Box& b) {
  const double lx = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ly = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (lx < 0.0 || ly < 0.0) return false;
  const bool a_seg_x = a.x1 - a.x0 <= 0.0, a_seg_y = a.y1 - a.y0 <= 0.0;
  if (a_seg_y) return lx > 0.0;  // horizontal segment: needs length along x
  if (a_seg_x) return ly > 0.0;
  return lx > 0.0 && ly > 0.0;
}

}  // namespace

void validate_boundary_overlap(const std::vector<BoundaryCondition>& bcs) {
  for (const auto& n : bcs) {
    if (n.kind != BcKind::Traction && n.kind != BcKind::Flux) continue;
    for (const auto& d : bcs) {
      if (d.particle_tag >= 0) continue;
      bool conflict = false;
      if (n.kind == BcKind::Traction) {
        if (d.kind == BcKind::FixedDisplacement) {
          conflict = true;
        } else if (d.kind == BcKind::Roller) {
          conflict = (d.component == 0 ? n.vector_value.x : n.vector_value.y) != 0.0;
        }
      } else {
        conflict = d.kind == BcKind::Pressure && !d.free_surface;
      }
      if (conflict && positive_overlap(n.box, d.box)) {
        throw ConfigError(std::string("boundary: ") + to_string(n.kind) + " segment overlaps a " +
                          to_string(d.kind) + " constraint on the same field");
      }
    }
  }
}

}  // namespace stabmpm
