#include "stabmpm/particles.hpp"

#include <cmath>
#include <sstream>

#include "stabmpm/error.hpp"
#include "stabmpm/kinematics.hpp"

namespace stabmpm {

std::vector<ParticleGeometry> geometry(const Particles& mps) {
  std::vector<ParticleGeometry> g(mps.size());
  for (std::size_t k = 0; k < mps.size(); ++k) g[k] = {mps[k].x, mps[k].lp};
  return g;
}

namespace {

int aligned_cells(double lo, double hi, double origin, double h, const char* axis) {
  const double s0 = (lo - origin) / h, s1 = (hi - origin) / h;
  if (std::abs(s0 - std::round(s0)) > 1e-9 || std::abs(s1 - std::round(s1)) > 1e-9 || !(s1 > s0)) {
    std::ostringstream msg;
    msg << "seeding region [" << lo << ", " << hi << "] along " << axis << " does not align with the grid";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(std::round(s0));
}

MaterialPoint make_point(Vec2 x, Vec2 lp, double V, int material, double phi0) {
  MaterialPoint mp;
  mp.x = mp.X = x;
  mp.V = mp.V0 = V;
  mp.lp = mp.lp0 = lp;
  mp.material = material;
  mp.phi = phi0;
  return mp;
}

}  // namespace

Particles seed_lattice(const BackgroundGrid& grid, const Box& region, int n_x, int n_y, int material,
                       double phi0) {
  if (n_x < 1 || n_y < 1) throw ConfigError("seeding: particles per cell must be positive");
  const double h = grid.h;
  const int i0 = aligned_cells(region.x0, region.x1, grid.origin.x, h, "x");
  const int j0 = aligned_cells(region.y0, region.y1, grid.origin.y, h, "y");
  const int ni = static_cast<int>(std::round((region.x1 - region.x0) / h));
  const int nj = static_cast<int>(std::round((region.y1 - region.y0) / h));
  if (i0 < 0 || j0 < 0 || i0 + ni > grid.nx || j0 + nj > grid.ny) throw ConfigError("seeding region outside the grid");
  const double dx = h / n_x, dy = h / n_y;
  const Vec2 lp{0.5 * dx, 0.5 * dy};
  Particles out;
  out.reserve(static_cast<std::size_t>(ni) * nj * n_x * n_y);
  for (int j = j0; j < j0 + nj; ++j) {
    for (int b = 0; b < n_y; ++b) {
      for (int i = i0; i < i0 + ni; ++i) {
        for (int a = 0; a < n_x; ++a) {
          const Vec2 x{grid.origin.x + i * h + (a + 0.5) * dx, grid.origin.y + j * h + (b + 0.5) * dy};
          out.push_back(make_point(x, lp, dx * dy, material, phi0));
        }
      }
    }
  }
  return out;
}

Particles seed_disc(const BackgroundGrid& grid, Vec2 centre, double radius, double spacing, int material,
                    double phi0) {
  if (!(spacing > 0.0) || !(radius > 0.0)) throw ConfigError("disc seeding: radius and spacing must be positive");
  Particles out;
  const Vec2 hi = grid.upper();
  const int K = static_cast<int>(std::ceil(radius / spacing)) + 1;
  for (int m = -K - 1; m <= K; ++m) {
    for (int k = -K - 1; k <= K; ++k) {
      const double dx = (k + 0.5) * spacing, dy = (m + 0.5) * spacing;
      if (dx * dx + dy * dy > radius * radius) continue;
      const Vec2 x{centre.x + dx, centre.y + dy};
      if (x.x < grid.origin.x || x.y < grid.origin.y || x.x > hi.x || x.y > hi.y)
        throw ConfigError("disc seeding: disc extends outside the grid");
      out.push_back(make_point(x, {0.5 * spacing, 0.5 * spacing}, spacing * spacing, material, phi0));
    }
  }
  return out;
}

void NodalState::resize(int n) {
  v.assign(n, Vec2{});
  a.assign(n, Vec2{});
  p.assign(n, 0.0);
  p_dot.assign(n, 0.0);
  p_ddot.assign(n, 0.0);
  valid.assign(n, 0);
}

namespace {

double particle_mass(const MaterialPoint& mp, const std::vector<MaterialParams>& materials) {
  return mixture_density(mp.phi, materials[mp.material]) * mp.V;
}

}  // namespace

void p2g_fill(const TransferPlan& plan, const Particles& mps, const std::vector<MaterialParams>& materials,
              const std::vector<char>& need, NodalState& nodal) {
  const int n = static_cast<int>(need.size());
  std::vector<char> fill(n, 0);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!need[i]) {
      nodal.valid[i] = 0;
    } else if (!nodal.valid[i]) {
      fill[i] = 1;
      any = true;
    }
  }
  if (!any) return;
  std::vector<double> msum(n, 0.0), vsum(n, 0.0);
  std::vector<Vec2> mv(n), ma(n);
  std::vector<double> vp(n, 0.0), vpd(n, 0.0), vpdd(n, 0.0);
  for (std::size_t k = 0; k < mps.size(); ++k) {
    const auto& st = plan.stencils[k];
    const MaterialPoint& mp = mps[k];
    const double m = particle_mass(mp, materials);
    for (int q = 0; q < st.n_nodes; ++q) {
      const int i = st.node[q];
      if (!fill[i]) continue;
      const double S = st.S[q];
      msum[i] += S * m;
      mv[i] += (S * m) * mp.v;
      ma[i] += (S * m) * mp.a;
      vsum[i] += S * mp.V;
      vp[i] += S * mp.V * mp.p;
      vpd[i] += S * mp.V * mp.p_dot;
      vpdd[i] += S * mp.V * mp.p_ddot;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!fill[i]) continue;
    if (msum[i] > 0.0) {
      nodal.v[i] = (1.0 / msum[i]) * mv[i];
      nodal.a[i] = (1.0 / msum[i]) * ma[i];
    } else {
      nodal.v[i] = nodal.a[i] = Vec2{};
    }
    if (vsum[i] > 0.0) {
      nodal.p[i] = vp[i] / vsum[i];
      nodal.p_dot[i] = vpd[i] / vsum[i];
      nodal.p_ddot[i] = vpdd[i] / vsum[i];
    } else {
      nodal.p[i] = nodal.p_dot[i] = nodal.p_ddot[i] = 0.0;
    }
    nodal.valid[i] = 1;
  }
}

std::vector<double> p2g_scalar(const TransferPlan& plan, const std::vector<double>& f,
                               const std::vector<double>& weight, int n_nodes) {
  std::vector<double> num(n_nodes, 0.0), den(n_nodes, 0.0);
  for (std::size_t k = 0; k < plan.stencils.size(); ++k) {
    const auto& st = plan.stencils[k];
    for (int q = 0; q < st.n_nodes; ++q) {
      num[st.node[q]] += st.S[q] * weight[k] * f[k];
      den[st.node[q]] += st.S[q] * weight[k];
    }
  }
  for (int i = 0; i < n_nodes; ++i) num[i] = den[i] > 0.0 ? num[i] / den[i] : 0.0;
  return num;
}

double g2p_scalar(const ParticleStencil& st, const std::vector<double>& nodal) {
  double r = 0.0;
  for (int q = 0; q < st.n_nodes; ++q) r += st.S[q] * nodal[st.node[q]];
  return r;
}

Vec2 g2p_vector(const ParticleStencil& st, const std::vector<Vec2>& nodal) {
  Vec2 r;
  for (int q = 0; q < st.n_nodes; ++q) r += st.S[q] * nodal[st.node[q]];
  return r;
}

void post_solution_update(const TransferPlan& plan, const std::vector<Vec2>& du, const std::vector<double>& p,
                          const NodalState& rates, bool dynamic, const std::vector<MaterialParams>& materials,
                          Particles& mps) {
  for (std::size_t k = 0; k < mps.size(); ++k) {
    const auto& st = plan.stencils[k];
    MaterialPoint& mp = mps[k];
    Tensor2d g = Tensor2d::zero();
    for (int q = 0; q < st.n_nodes; ++q) g += outer(du[st.node[q]], st.dS[q]);
    const KinematicState ks = compose_step(mp.F, g);
    mp.F = ks.F;
    mp.V = update_volume(mp.V, ks.dJ);
    mp.phi = update_porosity(ks.J, materials[mp.material].phi0);
    mp.p = g2p_scalar(st, p);
    mp.p_dot = g2p_scalar(st, rates.p_dot);
    if (dynamic) {
      mp.v = g2p_vector(st, rates.v);
      mp.a = g2p_vector(st, rates.a);
      mp.p_ddot = g2p_scalar(st, rates.p_ddot);
    }
  }
}

void convect_and_update_domains(const TransferPlan& plan, const std::vector<Vec2>& du, const BackgroundGrid& grid,
                                Particles& mps, long step) {
  const double cap = 0.5 * grid.h;
  for (std::size_t k = 0; k < mps.size(); ++k) {
    MaterialPoint& mp = mps[k];
    mp.x += g2p_vector(plan.stencils[k], du);
    if (!grid.contains(mp.x, 1e-9)) {
      std::ostringstream msg;
      msg << "particle " << k << " convected to " << mp.x << " outside the grid";
      if (step >= 0) msg << " at step " << step;
      throw OutOfDomain(msg.str());
    }
    const Tensor2d U = right_stretch(mp.F);
    mp.lp = {std::min(cap, mp.lp0.x * U(0, 0)), std::min(cap, mp.lp0.y * U(1, 1))};
  }
}

double total_solid_mass(const Particles& mps, const std::vector<MaterialParams>& materials) {
  double m = 0.0;
  for (const auto& mp : mps) m += (1.0 - mp.phi) * materials[mp.material].rho_s * mp.V;
  return m;
}

Vec2 total_momentum(const Particles& mps, const std::vector<MaterialParams>& materials) {
  Vec2 P;
  for (const auto& mp : mps) P += particle_mass(mp, materials) * mp.v;
  return P;
}

}  // namespace stabmpm
