#include "stabmpm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

const char* to_string(BasisKind k) { return k == BasisKind::GIMP ? "gimp" : "linear"; }

double hat(double xi, double h) { return std::max(0.0, 1.0 - std::abs(xi) / h); }

double hat_gradient(double xi, double h) {
  if (std::abs(xi) >= h) return 0.0;
  return xi > 0.0 ? -1.0 / h : (xi < 0.0 ? 1.0 / h : 0.0);
}

namespace {

void check_lp(double lp, double h) {
  if (!(lp > 0.0) || lp > 0.5 * h * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "GIMP half-length " << lp << " outside (0, h/2] for h = " << h;
    throw UnsupportedDomain(msg.str());
  }
}

// Antiderivative of the unit hat in s = (x - x_node)/h, so that
// int_a^b N dx = h (Phi(s_b) - Phi(s_a)).
double hat_antiderivative(double s) {
  if (s <= -1.0) return 0.0;
  if (s <= 0.0) return 0.5 * (s + 1.0) * (s + 1.0);
  if (s < 1.0) return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
  return 1.0;
}

}  // namespace

double gimp_weight_1d(double xi, double lp, double h) {
  check_lp(lp, h);
  const double r = std::abs(xi);
  if (r < lp) return 1.0 - (xi * xi + lp * lp) / (2.0 * h * lp);
  if (r < h - lp) return 1.0 - r / h;
  if (r < h + lp) return (h + lp - r) * (h + lp - r) / (4.0 * h * lp);
  return 0.0;
}

double gimp_gradient_1d(double xi, double lp, double h) {
  // derivative with respect to the particle position, i.e. of S(x_p - x_node)
  check_lp(lp, h);
  const double r = std::abs(xi);
  const double sgn = xi > 0.0 ? 1.0 : (xi < 0.0 ? -1.0 : 0.0);
  if (r < lp) return -xi / (h * lp);
  if (r < h - lp) return -sgn / h;
  if (r < h + lp) return -sgn * (h + lp - r) / (2.0 * h * lp);
  return 0.0;
}

Weight1d gimp_interval(double a, double b, double x_node, double h) {
  const double len = b - a;
  const double sa = (a - x_node) / h, sb = (b - x_node) / h;
  const double S = h * (hat_antiderivative(sb) - hat_antiderivative(sa)) / len;
  const double dS = (hat(b - x_node, h) - hat(a - x_node, h)) / len;
  return {S, dS};
}

double overlap_fraction(double a, double b, double c0, double c1) {
  const double l = std::min(b, c1) - std::max(a, c0);
  return l > 0.0 ? l / (b - a) : 0.0;
}

namespace {

struct Axis1d {
  int n = 0;
  std::array<int, 4> idx{};
  std::array<double, 4> S{}, dS{};
  int n_cells = 0;
  std::array<int, 2> cell{};
  std::array<double, 2> frac{};
};

Axis1d axis_linear(double x, double origin, double h, int ncell) {
  Axis1d ax;
  const double s = (x - origin) / h;
  const int k = std::clamp(static_cast<int>(std::ceil(s)) - 1, 0, ncell - 1);
  const double xi = s - k;  // in [0, 1]
  ax.n = 2;
  ax.idx = {k, k + 1, 0, 0};
  ax.S = {1.0 - xi, xi, 0.0, 0.0};
  ax.dS = {-1.0 / h, 1.0 / h, 0.0, 0.0};
  ax.n_cells = 1;
  ax.cell = {k, 0};
  ax.frac = {1.0, 0.0};
  return ax;
}

Axis1d axis_gimp(double x, double lp, double origin, double h, int ncell) {
  Axis1d ax;
  const double lo = origin, hi = origin + ncell * h;
  const double a = std::max(x - lp, lo), b = std::min(x + lp, hi);
  if (!(b > a)) throw UnsupportedDomain("particle influence domain has no overlap with the grid");
  const int k0 = std::max(0, static_cast<int>(std::floor((a - h - lo) / h)));
  const int k1 = std::min(ncell, static_cast<int>(std::ceil((b + h - lo) / h)));
  for (int k = k0; k <= k1; ++k) {
    const double xn = lo + k * h;
    if (!(xn > a - h && xn < b + h)) continue;
    const Weight1d w = gimp_interval(a, b, xn, h);
    if (w.S == 0.0 && w.dS == 0.0) continue;
    if (ax.n == 3) throw UnsupportedDomain("GIMP stencil wider than 3 nodes per axis");
    ax.idx[ax.n] = k;
    ax.S[ax.n] = w.S;
    ax.dS[ax.n] = w.dS;
    ++ax.n;
  }
  for (int c = std::max(0, k0); c < std::min(ncell, k1 + 1); ++c) {
    const double f = overlap_fraction(a, b, lo + c * h, lo + (c + 1) * h);
    if (f <= 0.0) continue;
    if (ax.n_cells == 2) throw UnsupportedDomain("GIMP domain spans more than 2 cells per axis");
    ax.cell[ax.n_cells] = c;
    ax.frac[ax.n_cells] = f;
    ++ax.n_cells;
  }
  return ax;
}

// Drop nodes whose support weight sum_k S_k A_k (A_k = 4 lp_x lp_y) is
// below min_weight h^2 and renormalize the affected stencils so that the
// weights still sum to one and the gradients to zero.
void prune_weak_nodes(const BackgroundGrid& grid, const std::vector<ParticleGeometry>& pts, double min_weight,
                      TransferPlan& plan) {
  if (!(min_weight > 0.0)) return;
  std::vector<double> w(grid.node_count(), 0.0);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& st = plan.stencils[k];
    double A = 4.0 * pts[k].lp.x * pts[k].lp.y;
    if (!(A > 0.0)) A = grid.h * grid.h;  // point particles (linear basis)
    for (int q = 0; q < st.n_nodes; ++q) w[st.node[q]] += st.S[q] * A;
  }
  const double cut = min_weight * grid.h * grid.h;
  std::vector<char> weak(grid.node_count(), 0);
  bool any = false;
  for (int n = 0; n < grid.node_count(); ++n) {
    if (plan.node_active[n] && w[n] < cut) {
      weak[n] = 1;
      plan.node_active[n] = 0;
      any = true;
    }
  }
  if (!any) return;
  for (auto& st : plan.stencils) {
    int m = 0;
    double sum = 0.0;
    Vec2 grad;
    for (int q = 0; q < st.n_nodes; ++q) {
      if (weak[st.node[q]]) continue;
      st.node[m] = st.node[q];
      st.S[m] = st.S[q];
      st.dS[m] = st.dS[q];
      sum += st.S[m];
      grad += st.dS[m];
      ++m;
    }
    if (m == st.n_nodes) continue;
    if (!(sum > 0.0)) throw UnsupportedDomain("material point lost all of its grid support");
    st.n_nodes = m;
    for (int q = 0; q < m; ++q) {
      st.S[q] /= sum;
      st.dS[q] = (1.0 / sum) * (st.dS[q] - st.S[q] * grad);
    }
  }
}

}  // namespace

TransferPlan build_plan(const BackgroundGrid& grid, BasisKind kind, const std::vector<ParticleGeometry>& pts,
                        long step, double min_node_weight) {
  TransferPlan plan;
  plan.kind = kind;
  plan.stencils.resize(pts.size());
  plan.node_active.assign(grid.node_count(), 0);
  plan.cell_members.assign(grid.cell_count(), {});
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec2& x = pts[k].x;
    if (!grid.contains(x, 1e-9)) {
      std::ostringstream msg;
      msg << "particle " << k << " at " << x << " left the grid";
      if (step >= 0) msg << " at step " << step;
      throw OutOfDomain(msg.str());
    }
    Axis1d ax, ay;
    if (kind == BasisKind::Linear) {
      ax = axis_linear(x.x, grid.origin.x, grid.h, grid.nx);
      ay = axis_linear(x.y, grid.origin.y, grid.h, grid.ny);
    } else {
      const double tol = 0.5 * grid.h * 1e-9;
      for (double l : {pts[k].lp.x, pts[k].lp.y}) {
        if (!(l > 0.0) || l > 0.5 * grid.h + tol) {
          std::ostringstream msg;
          msg << "particle " << k << ": GIMP half-length " << l << " exceeds h/2";
          throw UnsupportedDomain(msg.str());
        }
      }
      ax = axis_gimp(x.x, std::min(pts[k].lp.x, 0.5 * grid.h), grid.origin.x, grid.h, grid.nx);
      ay = axis_gimp(x.y, std::min(pts[k].lp.y, 0.5 * grid.h), grid.origin.y, grid.h, grid.ny);
    }
    ParticleStencil& st = plan.stencils[k];
    for (int j = 0; j < ay.n; ++j) {
      for (int i = 0; i < ax.n; ++i) {
        const int id = grid.node_id(ax.idx[i], ay.idx[j]);
        st.node[st.n_nodes] = id;
        st.S[st.n_nodes] = ax.S[i] * ay.S[j];
        st.dS[st.n_nodes] = {ax.dS[i] * ay.S[j], ax.S[i] * ay.dS[j]};
        ++st.n_nodes;
        plan.node_active[id] = 1;
      }
    }
    for (int j = 0; j < ay.n_cells; ++j) {
      for (int i = 0; i < ax.n_cells; ++i) {
        const int c = grid.cell_id(ax.cell[i], ay.cell[j]);
        st.cell[st.n_cells] = c;
        st.overlap[st.n_cells] = ax.frac[i] * ay.frac[j];
        ++st.n_cells;
        plan.cell_members[c].push_back({static_cast<int>(k), ax.frac[i] * ay.frac[j]});
      }
    }
    st.home_cell = grid.locate_cell(x);
  }
  prune_weak_nodes(grid, pts, min_node_weight, plan);
  return plan;
}

std::vector<double> element_average(const TransferPlan& plan, const std::vector<double>& volume,
                                     const std::vector<double>& values) {
  std::vector<double> out(plan.cell_members.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < plan.cell_members.size(); ++c) {
    double wsum = 0.0, acc = 0.0;
    for (const auto& [mp, frac] : plan.cell_members[c]) {
      const double w = volume[mp] * frac;
      wsum += w;
      acc += w * values[mp];
    }
    if (wsum > 0.0) out[c] = acc / wsum;
  }
  return out;
}

}  // namespace stabmpm
