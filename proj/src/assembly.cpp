#include "stabmpm/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stabmpm/dual.hpp"
#include "stabmpm/error.hpp"
#include "stabmpm/kinematics.hpp"

namespace stabmpm {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat BlockSystem::monolithic() const {
  const int n = n_u + n_p;
  Triplets t;
  t.reserve(A.nonZeros() + B1.nonZeros() + B2.nonZeros() + C.nonZeros() + C_stab.nonZeros());
  auto put = [&t](const SpMat& m, int r0, int c0) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  };
  put(A, 0, 0);
  put(B1, 0, n_u);
  put(B2, n_u, 0);
  put(C, n_u, n_u);
  if (has_stab) put(C_stab, n_u, n_u);
  SpMat J(n, n);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Vec BlockSystem::residual() const {
  Vec r(n_u + n_p);
  r.head(n_u) = R_mom;
  if (has_stab) {
    r.tail(n_p) = R_mass + R_stab;
  } else {
    r.tail(n_p) = R_mass;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary loads

std::vector<LoadedFace> resolve_loaded_faces(const BackgroundGrid& grid, const Particles& mps,
                                             const std::vector<BoundaryCondition>& bcs) {
  std::vector<LoadedFace> faces;
  const double tol = 1e-9 * grid.h;
  for (int b = 0; b < static_cast<int>(bcs.size()); ++b) {
    const auto& bc = bcs[b];
    if (bc.kind != BcKind::Traction && bc.kind != BcKind::Flux) continue;
    const bool horiz = std::abs(bc.box.y1 - bc.box.y0) <= tol;
    const bool vert = std::abs(bc.box.x1 - bc.box.x0) <= tol;
    if (horiz == vert) throw ConfigError(std::string(to_string(bc.kind)) + " selector must be a segment");
    const int axis = horiz ? 1 : 0;
    const double line = horiz ? bc.box.y0 : bc.box.x0;
    const double org = horiz ? grid.origin.y : grid.origin.x;
    const double s = (line - org) / grid.h;
    if (std::abs(s - std::round(s)) > 1e-9) {
      throw ConfigError(std::string(to_string(bc.kind)) + " segment does not lie on a grid line");
    }
    const double lo = horiz ? bc.box.x0 : bc.box.y0, hi = horiz ? bc.box.x1 : bc.box.y1;
    int found = 0;
    for (int k = 0; k < static_cast<int>(mps.size()); ++k) {
      const auto& mp = mps[k];
      for (int side : {1, -1}) {
        const double f = mp.x[axis] + side * mp.lp[axis];
        if (std::abs(f - line) > tol) continue;
        const double c = mp.x[1 - axis], l = mp.lp[1 - axis];
        const double a = std::max(c - l, lo), e = std::min(c + l, hi);
        if (!(e - a > tol)) continue;
        faces.push_back({k, axis, side, (a - c) / l, (e - c) / l, b});
        ++found;
      }
    }
    if (found == 0) throw ConfigError(std::string(to_string(bc.kind)) + " segment touches no particle face");
  }
  return faces;
}

namespace {

// Bilinear hats of the cell holding x.
struct CellHats {
  std::array<int, 4> node;
  std::array<double, 4> N;
};

CellHats cell_hats(const BackgroundGrid& g, const Vec2& x) {
  const int c = g.locate_cell(x);
  const auto ij = g.cell_ij(c);
  const double sx = std::clamp((x.x - g.origin.x) / g.h - ij[0], 0.0, 1.0);
  const double sy = std::clamp((x.y - g.origin.y) / g.h - ij[1], 0.0, 1.0);
  CellHats r;
  r.node = {g.node_id(ij[0], ij[1]), g.node_id(ij[0] + 1, ij[1]), g.node_id(ij[0], ij[1] + 1),
            g.node_id(ij[0] + 1, ij[1] + 1)};
  r.N = {(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy};
  return r;
}

}  // namespace

NeumannContribution apply_neumann(const BackgroundGrid& grid, const Particles& mps,
                                  const std::vector<BoundaryCondition>& bcs, const std::vector<LoadedFace>& faces,
                                  double t) {
  NeumannContribution out;
  out.force.assign(grid.node_count(), Vec2{});
  out.flux.assign(grid.node_count(), 0.0);
  const double g = 1.0 / std::sqrt(3.0);
  for (const auto& f : faces) {
    const auto& bc = bcs[f.bc];
    const double amp = bc.amplitude(t);
    if (amp == 0.0) continue;
    const auto& mp = mps[f.particle];
    const int ta = 1 - f.axis;
    Vec2 centre = mp.x;
    centre[f.axis] += f.side * mp.lp[f.axis];
    const double half = mp.lp[ta];
    const double mid = 0.5 * (f.s0 + f.s1), rad = 0.5 * (f.s1 - f.s0);
    const double len = (f.s1 - f.s0) * half;
    for (double gp : {-g, g}) {
      Vec2 x = centre;
      x[ta] += (mid + gp * rad) * half;
      const CellHats hats = cell_hats(grid, x);
      for (int q = 0; q < 4; ++q) {
        const double w = 0.5 * len * hats.N[q];
        if (bc.kind == BcKind::Traction) {
          out.force[hats.node[q]] += (w * amp) * bc.vector_value;
        } else {
          out.flux[hats.node[q]] += w * amp * bc.scalar_value;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stabilization parameter

std::vector<double> compute_cell_tau(const BackgroundGrid& grid, const TransferPlan& plan, const Particles& mps,
                                     const std::vector<MaterialParams>& materials, const IntegratorConfig& integ,
                                     bool undrained) {
  std::vector<double> tau(grid.cell_count(), 0.0);
  for (int c = 0; c < grid.cell_count(); ++c) {
    double W = 0.0, kappa = 0.0, lam = 0.0, G = 0.0;
    for (const auto& [k, frac] : plan.cell_members[c]) {
      const auto& mp = mps[k];
      const auto& m = materials[mp.material];
      const double w = mp.V * frac;
      W += w;
      kappa += w * (undrained ? 0.0 : permeability(mp.phi, m) / m.mu_f);
      lam += w * m.lambda;
      G += w * m.G;
    }
    if (W <= 0.0) continue;
    tau[c] = stabilization_tau(integ.regime, lam / W, G / W, kappa / W, grid.h, integ);
  }
  return tau;
}

// ---------------------------------------------------------------------------
// Particle kernel

namespace {

template <class T>
struct Local {
  int n = 0;
  std::array<Vector2<T>, kMaxNodes> U;
  std::array<T, kMaxNodes> P;
  std::array<Vector2<T>, kMaxNodes> mom;
  std::array<T, kMaxNodes> mass;
};

std::string who(int k) { return "particle " + std::to_string(k); }

template <class T>
void particle_kernel(const AssemblyContext& ctx, int k, Local<T>& L) {
  const ParticleStencil& st = ctx.plan->stencils[k];
  const MaterialPoint& mp = (*ctx.particles)[k];
  const MaterialParams& mat = (*ctx.materials)[mp.material];
  const IntegratorConfig& in = ctx.integ;
  const bool dynamic = in.regime == Regime::Dynamic;
  const bool frozen = ctx.mode == JacobianMode::Frozen;
  const int n = st.n_nodes;

  Tensor2<T> g = Tensor2<T>::zero();
  for (int q = 0; q < n; ++q) g += outer(L.U[q], st.dS[q]);
  const Tensor2<T> dF = Tensor2<T>::identity() + g;
  const T dJ = det(dF);
  if (!(value_of(dJ) > 0.0)) {
    std::ostringstream msg;
    msg << "element inversion at " << who(k) << ": det(dF) = " << value_of(dJ);
    throw ElementInversion(msg.str());
  }
  const Tensor2<T> dFinvT = transpose(inverse(dF));
  const Tensor2<T> F = dF * mp.F;
  const T J = det(F);
  const T V = dJ * mp.V;

  std::array<Vector2<T>, kMaxNodes> gS;
  for (int q = 0; q < n; ++q) gS[q] = dFinvT * st.dS[q];

  const Tensor2<T> sigma = hencky_stress(F, mat, who(k));

  // nodal rates
  std::array<Vector2<T>, kMaxNodes> vq, aq;
  const double cv = in.rate_factor(), ca = in.accel_factor();
  for (int q = 0; q < n; ++q) {
    const int node = st.node[q];
    if (dynamic) {
      const Vec2 vn = ctx.prev->v[node], an = ctx.prev->a[node];
      const NewmarkHistory hx = newmark_history(vn.x, an.x, in), hy = newmark_history(vn.y, an.y, in);
      vq[q] = {cv * L.U[q].x + hx.v_hist, cv * L.U[q].y + hy.v_hist};
      aq[q] = {ca * L.U[q].x + hx.a_hist, ca * L.U[q].y + hy.a_hist};
    } else {
      vq[q] = cv * L.U[q];
      aq[q] = Vector2<T>{T(0.0), T(0.0)};
    }
  }
  Vector2<T> a_mp{T(0.0), T(0.0)};
  Tensor2<T> grad_v = Tensor2<T>::zero();
  T p_mp(0.0);
  Vector2<T> grad_p{T(0.0), T(0.0)};
  for (int q = 0; q < n; ++q) {
    a_mp += st.S[q] * aq[q];
    grad_v += outer(vq[q], gS[q]);
    p_mp += st.S[q] * L.P[q];
    grad_p += L.P[q] * gS[q];
  }
  const T div_v = trace(grad_v);

  const T phi = update_porosity(J, mat.phi0);
  const T kappa = ctx.undrained ? T(0.0) : permeability(phi, mat) * (1.0 / mat.mu_f);
  const T rho = mixture_density(phi, mat);
  const Vector2<T> qf = darcy_flux(grad_p, a_mp, kappa, mat);
  const T mass = rho * V;
  const T m_inertia = frozen ? detach(mass) : mass;

  // viscous (Kelvin) stress
  const bool visc = dynamic && mat.alpha_vis > 0.0;
  std::array<Vector2<T>, kMaxNodes> gS_vis;
  T V_vis = V;
  Tensor2<T> sigma_vis = Tensor2<T>::zero();
  if (visc) {
    Tensor2<T> gv = Tensor2<T>::zero();
    for (int q = 0; q < n; ++q) {
      gS_vis[q] = frozen ? detach(gS[q]) : gS[q];
      gv += outer(vq[q], gS_vis[q]);
    }
    if (frozen) V_vis = detach(V);
    sigma_vis = viscous_stress(sym(gv), mat);
  }

  for (int q = 0; q < n; ++q) {
    Vector2<T> f = V * (p_mp * gS[q] - sigma * gS[q]);
    f -= (st.S[q] * m_inertia) * a_mp;
    f += (st.S[q] * mass) * mat.gravity;
    if (visc) f -= V_vis * (sigma_vis * gS_vis[q]);
    L.mom[q] = f;
    L.mass[q] = V * (st.S[q] * div_v - dot(gS[q], qf));
  }
}

void gather_double(const AssemblyContext& ctx, const TrialState& trial, int k, Local<double>& L) {
  const auto& st = ctx.plan->stencils[k];
  L.n = st.n_nodes;
  for (int q = 0; q < L.n; ++q) {
    L.U[q] = trial.U[st.node[q]];
    L.P[q] = trial.P[st.node[q]];
  }
}

void gather_dual(const AssemblyContext& ctx, const TrialState& trial, int k, Local<ADouble>& L) {
  const auto& st = ctx.plan->stencils[k];
  L.n = st.n_nodes;
  for (int q = 0; q < L.n; ++q) {
    const int node = st.node[q];
    L.U[q] = {ADouble::variable(trial.U[node].x, 3 * q), ADouble::variable(trial.U[node].y, 3 * q + 1)};
    L.P[q] = ADouble::variable(trial.P[node], 3 * q + 2);
  }
}

void add_neumann(const AssemblyContext& ctx, Vec& R_mom, Vec& R_mass) {
  if (!ctx.neumann) return;
  const DofMap& d = *ctx.dofs;
  for (int i = 0; i < static_cast<int>(d.p.size()); ++i) {
    if (!d.active[i]) continue;
    for (int c = 0; c < 2; ++c)
      if (d.u[i][c] >= 0) R_mom[d.u[i][c]] += ctx.neumann->force[i][c];
    if (d.p[i] >= 0) R_mass[d.p[i]] += ctx.neumann->flux[i];
  }
}

void residual_pass(const AssemblyContext& ctx, const TrialState& trial, Vec& R_mom, Vec& R_mass) {
  const DofMap& d = *ctx.dofs;
  R_mom = Vec::Zero(d.n_u);
  R_mass = Vec::Zero(d.n_p);
  Local<double> L;
  for (int k = 0; k < static_cast<int>(ctx.particles->size()); ++k) {
    gather_double(ctx, trial, k, L);
    particle_kernel(ctx, k, L);
    const auto& st = ctx.plan->stencils[k];
    for (int q = 0; q < L.n; ++q) {
      const int node = st.node[q];
      for (int c = 0; c < 2; ++c)
        if (d.u[node][c] >= 0) R_mom[d.u[node][c]] += L.mom[q][c];
      if (d.p[node] >= 0) R_mass[d.p[node]] += L.mass[q];
    }
  }
  add_neumann(ctx, R_mom, R_mass);
}

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void pressure_mass(const AssemblyContext& ctx, BlockSystem& sys) {
  const DofMap& d = *ctx.dofs;
  Triplets t;
  for (int k = 0; k < static_cast<int>(ctx.particles->size()); ++k) {
    const auto& st = ctx.plan->stencils[k];
    const auto& mp = (*ctx.particles)[k];
    const auto& m = (*ctx.materials)[mp.material];
    const double K_dr = m.lambda + m.G;  // 2D drained bulk modulus lambda + 2G/d
    for (int a = 0; a < st.n_nodes; ++a) {
      const int ra = d.p[st.node[a]];
      if (ra < 0) continue;
      for (int b = 0; b < st.n_nodes; ++b) {
        const int rb = d.p[st.node[b]];
        if (rb < 0) continue;
        t.emplace_back(ra, rb, mp.V * st.S[a] * st.S[b] / K_dr);
      }
    }
  }
  sys.Mp_over_K = from_triplets(d.n_p, d.n_p, t);
}

}  // namespace

double nodal_pressure_rate(const AssemblyContext& ctx, int node, double P) {
  const double pn = ctx.prev->p[node];
  if (ctx.integ.regime == Regime::Dynamic) {
    return newmark_pressure_rates(P, pn, ctx.prev->p_dot[node], ctx.prev->p_ddot[node], ctx.integ).first;
  }
  return implicit_euler_rate(P - pn, ctx.integ.dt);
}

void assemble_stabilization(const AssemblyContext& ctx, const TrialState& trial, BlockSystem& sys) {
  const DofMap& d = *ctx.dofs;
  sys.R_stab = Vec::Zero(d.n_p);
  sys.C_stab = SpMat(d.n_p, d.n_p);
  sys.has_stab = false;
  if (!ctx.stabilized) return;
  const auto& plan = *ctx.plan;
  const auto& mps = *ctx.particles;
  const double rate = ctx.integ.rate_factor();

  std::vector<double> pdot_node(ctx.grid->node_count(), 0.0);
  for (int i = 0; i < ctx.grid->node_count(); ++i)
    if (d.active[i]) pdot_node[i] = nodal_pressure_rate(ctx, i, trial.P[i]);
  std::vector<double> pdot_mp(mps.size());
  for (std::size_t k = 0; k < mps.size(); ++k) pdot_mp[k] = g2p_scalar(plan.stencils[k], pdot_node);

  Triplets t;
  std::vector<int> nodes;
  std::vector<double> mean, Sk;
  for (int c = 0; c < ctx.grid->cell_count(); ++c) {
    const double tau = ctx.tau.empty() ? 0.0 : ctx.tau[c];
    const auto& members = plan.cell_members[c];
    if (!(tau > 0.0) || members.empty()) continue;
    nodes.clear();
    for (const auto& [k, frac] : members) {
      const auto& st = plan.stencils[k];
      for (int q = 0; q < st.n_nodes; ++q)
        if (std::find(nodes.begin(), nodes.end(), st.node[q]) == nodes.end()) nodes.push_back(st.node[q]);
    }
    std::sort(nodes.begin(), nodes.end());
    const int m = static_cast<int>(nodes.size());
    auto local = [&nodes](int node) {
      return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), node) - nodes.begin());
    };
    mean.assign(m, 0.0);
    double W = 0.0;
    for (const auto& [k, frac] : members) {
      const auto& st = plan.stencils[k];
      const double w = mps[k].V * frac;
      W += w;
      for (int q = 0; q < st.n_nodes; ++q) mean[local(st.node[q])] += w * st.S[q];
    }
    if (!(W > 0.0)) continue;
    for (double& x : mean) x /= W;
    // sum_k W (S_a - m_a)(S_b - m_b) = sum_k W S_a S_b - W m_a m_b
    std::vector<double> G(static_cast<std::size_t>(m) * m, 0.0), R(m, 0.0);
    for (const auto& [k, frac] : members) {
      const auto& st = plan.stencils[k];
      const double w = mps[k].V * frac;
      Sk.assign(m, 0.0);
      for (int q = 0; q < st.n_nodes; ++q) Sk[local(st.node[q])] = st.S[q];
      for (int a = 0; a < m; ++a) {
        const double da = Sk[a] - mean[a];
        R[a] += w * da * pdot_mp[k];
        for (int b = 0; b < m; ++b) G[a * m + b] += w * da * (Sk[b] - mean[b]);
      }
    }
    sys.has_stab = true;
    for (int a = 0; a < m; ++a) {
      const int ra = d.p[nodes[a]];
      if (ra < 0) continue;
      sys.R_stab[ra] += tau * R[a];
      for (int b = 0; b < m; ++b) {
        const int rb = d.p[nodes[b]];
        if (rb < 0) continue;
        t.emplace_back(ra, rb, tau * rate * G[a * m + b]);
      }
    }
  }
  sys.C_stab = from_triplets(d.n_p, d.n_p, t);
}

Vec assemble_momentum_residual(const AssemblyContext& ctx, const TrialState& trial) {
  Vec Rm, Rp;
  residual_pass(ctx, trial, Rm, Rp);
  return Rm;
}

Vec assemble_mass_residual(const AssemblyContext& ctx, const TrialState& trial) {
  Vec Rm, Rp;
  residual_pass(ctx, trial, Rm, Rp);
  return Rp;
}

BlockSystem assemble_residual(const AssemblyContext& ctx, const TrialState& trial) {
  BlockSystem sys;
  sys.n_u = ctx.dofs->n_u;
  sys.n_p = ctx.dofs->n_p;
  residual_pass(ctx, trial, sys.R_mom, sys.R_mass);
  assemble_stabilization(ctx, trial, sys);
  return sys;
}

BlockSystem assemble_jacobian(const AssemblyContext& ctx, const TrialState& trial) {
  const DofMap& d = *ctx.dofs;
  BlockSystem sys;
  sys.n_u = d.n_u;
  sys.n_p = d.n_p;
  sys.R_mom = Vec::Zero(d.n_u);
  sys.R_mass = Vec::Zero(d.n_p);
  Triplets tA, tB1, tB2, tC;
  const std::size_t np = ctx.particles->size();
  tA.reserve(np * 324);
  tB1.reserve(np * 162);
  tB2.reserve(np * 162);
  tC.reserve(np * 81);

  Local<ADouble> L;
  std::array<int, 3 * kMaxNodes> col_u, col_p;
  for (int k = 0; k < static_cast<int>(np); ++k) {
    gather_dual(ctx, trial, k, L);
    particle_kernel(ctx, k, L);
    const auto& st = ctx.plan->stencils[k];
    const int n = L.n;
    for (int q = 0; q < n; ++q) {
      const int node = st.node[q];
      col_u[3 * q] = d.u[node][0];
      col_u[3 * q + 1] = d.u[node][1];
      col_u[3 * q + 2] = -1;
      col_p[3 * q] = col_p[3 * q + 1] = -1;
      col_p[3 * q + 2] = d.p[node];
    }
    for (int q = 0; q < n; ++q) {
      const int node = st.node[q];
      for (int c = 0; c < 2; ++c) {
        const int r = d.u[node][c];
        if (r < 0) continue;
        const ADouble& f = L.mom[q][c];
        sys.R_mom[r] += f.v;
        for (int s = 0; s < 3 * n; ++s) {
          if (f.d[s] == 0.0) continue;
          if (col_u[s] >= 0) tA.emplace_back(r, col_u[s], f.d[s]);
          else if (col_p[s] >= 0) tB1.emplace_back(r, col_p[s], f.d[s]);
        }
      }
      const int r = d.p[node];
      if (r < 0) continue;
      const ADouble& g = L.mass[q];
      sys.R_mass[r] += g.v;
      for (int s = 0; s < 3 * n; ++s) {
        if (g.d[s] == 0.0) continue;
        if (col_u[s] >= 0) tB2.emplace_back(r, col_u[s], g.d[s]);
        else if (col_p[s] >= 0) tC.emplace_back(r, col_p[s], g.d[s]);
      }
    }
  }
  add_neumann(ctx, sys.R_mom, sys.R_mass);
  sys.A = from_triplets(d.n_u, d.n_u, tA);
  sys.B1 = from_triplets(d.n_u, d.n_p, tB1);
  sys.B2 = from_triplets(d.n_p, d.n_u, tB2);
  sys.C = from_triplets(d.n_p, d.n_p, tC);
  assemble_stabilization(ctx, trial, sys);
  pressure_mass(ctx, sys);
  return sys;
}

double residual_noise_floor(const AssemblyContext& ctx) {
  const DofMap& d = *ctx.dofs;
  std::vector<double> n(d.n_u, 0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int k = 0; k < static_cast<int>(ctx.particles->size()); ++k) {
    const auto& st = ctx.plan->stencils[k];
    const auto& mp = (*ctx.particles)[k];
    const double M = (*ctx.materials)[mp.material].constrained_modulus();
    for (int q = 0; q < st.n_nodes; ++q) {
      const double g = eps * M * mp.V * (std::abs(st.dS[q].x) + std::abs(st.dS[q].y));
      for (int c = 0; c < 2; ++c)
        if (d.u[st.node[q]][c] >= 0) n[d.u[st.node[q]][c]] += g;
    }
  }
  double s = 0.0;
  for (double x : n) s += x * x;
  return std::sqrt(s);
}

void add_increment(const DofMap& dofs, const Vec& delta, TrialState& trial) {
  for (int i = 0; i < static_cast<int>(dofs.p.size()); ++i) {
    if (!dofs.active[i]) continue;
    for (int c = 0; c < 2; ++c)
      if (dofs.u[i][c] >= 0) trial.U[i][c] += delta[dofs.u[i][c]];
    if (dofs.p[i] >= 0) trial.P[i] += delta[dofs.n_u + dofs.p[i]];
  }
}

}  // namespace stabmpm
