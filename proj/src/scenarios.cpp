#include "stabmpm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

double terzaghi_exact(double Z, double T, int n_terms) {
  if (n_terms <= 0) n_terms = T < 1e-4 ? 20000 : 200;
  double P = 0.0;
  for (int m = 0; m < n_terms; ++m) {
    const double M = M_PI * (2.0 * m + 1.0) / 2.0;
    P += (2.0 / M) * std::sin(M * Z) * std::exp(-M * M * T);
  }
  return P;
}

double Scene::excess_pressure(double p, const Vec2& x) const {
  if (!hydro_top) return p;
  return p - rho_f_g * (*hydro_top - x.y);
}

Preset parse_preset(const std::string& name) {
  if (name == "terzaghi") return Preset::Terzaghi;
  if (name == "footing") return Preset::Footing;
  if (name == "self_weight") return Preset::SelfWeight;
  if (name == "impact") return Preset::Impact;
  throw ConfigError("unknown preset '" + name + "' (expected terzaghi, footing, self_weight or impact)");
}

const char* to_string(Preset p) {
  switch (p) {
    case Preset::Terzaghi:
      return "terzaghi";
    case Preset::Footing:
      return "footing";
    case Preset::SelfWeight:
      return "self_weight";
    case Preset::Impact:
      return "impact";
  }
  return "?";
}

namespace {

constexpr double kInf = 1e300;

BoundaryCondition fixed_box(Box b) {
  BoundaryCondition bc;
  bc.kind = BcKind::FixedDisplacement;
  bc.box = b;
  return bc;
}

BoundaryCondition roller_box(Box b, int component) {
  BoundaryCondition bc;
  bc.kind = BcKind::Roller;
  bc.box = b;
  bc.component = component;
  return bc;
}

BoundaryCondition pressure_box(Box b, double value, bool free_surface) {
  BoundaryCondition bc;
  bc.kind = BcKind::Pressure;
  bc.box = b;
  bc.scalar_value = value;
  bc.free_surface = free_surface;
  return bc;
}

BoundaryCondition traction_segment(Box b, Vec2 t, Amplitude amp) {
  BoundaryCondition bc;
  bc.kind = BcKind::Traction;
  bc.box = b;
  bc.vector_value = t;
  bc.amplitude = amp;
  return bc;
}

int cells_for(double length, double h) {
  const double n = length / h;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1) {
    std::ostringstream msg;
    msg << "scale: cell size " << h << " does not divide the length " << length;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(std::round(n));
}

void apply_material_overrides(MaterialParams& m, const SceneOverrides& o) {
  if (o.lambda) m.lambda = *o.lambda;
  if (o.G) m.G = *o.G;
  if (o.alpha_vis) m.alpha_vis = *o.alpha_vis;
  if (o.k0) m.k0 = *o.k0;
  if (o.phi0) m.phi0 = *o.phi0;
  if (o.mu_f) m.mu_f = *o.mu_f;
  if (o.rho_s) m.rho_s = *o.rho_s;
  if (o.rho_f) m.rho_f = *o.rho_f;
  if (o.gravity) m.gravity = *o.gravity;
  if (o.kozeny_carman) m.kozeny_carman = *o.kozeny_carman;
}

std::vector<int> node_column(const BackgroundGrid& g, int i, int j0, int j1) {
  std::vector<int> out;
  for (int j = j0; j <= j1; ++j) out.push_back(g.node_id(i, j));
  return out;
}

Scene terzaghi(const SceneOverrides& o) {
  Scene s;
  s.name = "terzaghi";
  s.level = o.level.value_or(1);
  if (s.level != 1 && s.level != 2) throw ConfigError("terzaghi: level must be 1 or 2");
  s.scale = o.scale.value_or(1.0);
  const double H = 1.0, w = 1e3, c_v = 1.8e-5;
  const double h = H / (40.0 * s.level) / s.scale;
  const int n_occ = cells_for(H, h);
  s.grid = BackgroundGrid::build({0.0, 0.0}, {h, 4.0 * n_occ * h}, h);

  MaterialParams m = MaterialParams::from_K_nu(1e6, 0.25);
  m.mu_f = 1e-3;
  m.k0 = c_v / m.constrained_modulus() * m.mu_f;
  m.phi0 = 0.3;
  apply_material_overrides(m, o);
  s.materials = {m};
  s.particles = seed_lattice(s.grid, Box{0.0, h, 0.0, H}, 1, 2, 0, m.phi0);

  s.bcs.push_back(roller_box(Box{}, 0));
  s.bcs.push_back(fixed_box(Box{-kInf, kInf, 0.0, 0.0}));
  s.bcs.push_back(traction_segment(Box{0.0, h, H, H}, {0.0, -w}, {}));
  s.bcs.push_back(pressure_box(Box{-kInf, kInf, H, kInf}, 0.0, false));

  s.integ.regime = Regime::QuasiStatic;
  s.integ.dt = 0.1;
  s.t_end = 0.1;
  s.sample_nodes = node_column(s.grid, 0, 0, n_occ);
  s.probes = {{"mid", {0.5 * h, 0.5 * H}}};
  s.load = w;
  s.height = H;
  s.c_v = m.mobility0() * m.constrained_modulus();
  return s;
}

Scene footing(const SceneOverrides& o) {
  Scene s;
  s.name = "footing";
  s.scale = o.scale.value_or(1.0);
  const double L = 10.0, B = 1.0;
  const double h = 0.25 / s.scale;
  const int n = cells_for(L, h);
  const int head = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-9)));
  s.grid = BackgroundGrid::build({0.0, 0.0}, {L, (n + head) * h}, h);

  MaterialParams m;
  m.lambda = 8.4e6;
  m.G = 5.6e6;
  m.alpha_vis = 0.04;
  m.k0 = 1e-14;
  m.mu_f = 1e-3;
  m.rho_s = 2500.0;
  m.rho_f = 1000.0;
  m.phi0 = 0.33;
  apply_material_overrides(m, o);
  s.materials = {m};
  s.particles = seed_lattice(s.grid, Box{0.0, L, 0.0, L}, 2, 2, 0, m.phi0);

  s.bcs.push_back(roller_box(Box{0.0, 0.0, -kInf, kInf}, 0));
  s.bcs.push_back(roller_box(Box{L, L, -kInf, kInf}, 0));
  s.bcs.push_back(fixed_box(Box{-kInf, kInf, 0.0, 0.0}));
  s.bcs.push_back(traction_segment(Box{0.0, B, L, L}, {0.0, -3e6}, {Amplitude::Kind::OneMinusCos, 100.0}));
  // drained top surface outside the footing, following the settling surface
  s.bcs.push_back(pressure_box(Box{B + 0.5 * h, kInf, 0.5 * L, kInf}, 0.0, true));

  s.integ.regime = Regime::Dynamic;
  s.integ.dt = 1e-3;
  s.t_end = 0.4;
  s.sample_nodes = node_column(s.grid, 0, 0, n);
  s.probes = {{"A", {0.0625, 9.4375}}, {"B", {0.0625, 4.9375}}, {"C", {0.0625, 0.0625}}};
  return s;
}

MaterialParams porous_soft() {
  MaterialParams m = MaterialParams::from_K_nu(15e3, 0.3);
  m.k0 = 1e-14;
  m.mu_f = 1e-3;
  m.phi0 = 0.5;
  m.kozeny_carman = true;
  m.rho_s = 2600.0;
  m.rho_f = 1000.0;
  return m;
}

Scene self_weight(const SceneOverrides& o) {
  Scene s;
  s.name = "self_weight";
  s.level = o.level.value_or(1);
  if (s.level != 1 && s.level != 2) throw ConfigError("self_weight: level must be 1 or 2");
  s.scale = o.scale.value_or(1.0);
  const double L = 2.0, head = 0.5;
  const double h = (s.level == 1 ? 0.125 : 0.0625) / s.scale;
  const int ppc = s.level == 1 ? 5 : 4;
  const int n = cells_for(L, h);
  cells_for(head, h);
  s.grid = BackgroundGrid::build({0.0, 0.0}, {L, L + head}, h);

  MaterialParams m = porous_soft();
  m.gravity = {0.0, -9.81};
  apply_material_overrides(m, o);
  s.materials = {m};
  s.particles = seed_lattice(s.grid, Box{0.0, L, 0.0, L}, ppc, ppc, 0, m.phi0);

  s.bcs.push_back(roller_box(Box{0.0, 0.0, -kInf, kInf}, 0));
  s.bcs.push_back(roller_box(Box{L, L, -kInf, kInf}, 0));
  s.bcs.push_back(fixed_box(Box{-kInf, kInf, 0.0, 0.0}));
  // drained right wall and settling top surface
  s.bcs.push_back(pressure_box(Box{L, L, -kInf, kInf}, 0.0, false));
  s.bcs.push_back(pressure_box(Box{-kInf, kInf, 0.5 * L, kInf}, 0.0, true));

  s.integ.regime = Regime::QuasiStatic;
  s.integ.dt = 0.1;
  s.integ.dt_growth = 1.2;
  s.t_end = 1.0e7;
  s.undrained_first_step = true;
  s.sample_nodes = node_column(s.grid, 0, 0, n);
  s.probes = {{"bottom", {0.5 * h / ppc, 0.5 * h / ppc}}, {"mid", {0.5 * h / ppc, 1.0 + 0.5 * h / ppc}}};
  s.hydro_top = L;
  s.rho_f_g = m.rho_f * std::abs(m.gravity.y);
  return s;
}

Scene impact(const SceneOverrides& o) {
  Scene s;
  s.name = "impact";
  s.scale = o.scale.value_or(1.0);
  const double h = 0.01 / s.scale;
  cells_for(1.0, h);
  s.grid = BackgroundGrid::build({0.0, 0.0}, {1.0, 1.0}, h);

  const double nu = 0.3;
  MaterialParams m = porous_soft();
  const MaterialParams e = MaterialParams::from_E_nu(100e3, nu);
  m.lambda = e.lambda;
  m.G = e.G;
  apply_material_overrides(m, o);
  s.materials = {m};

  const double r = 0.2, spacing = 0.4 * h;
  const Vec2 cA{0.2, 0.2}, cB{0.8, 0.8};
  Particles a = seed_disc(s.grid, cA, r, spacing, 0, m.phi0);
  Particles b = seed_disc(s.grid, cB, r, spacing, 0, m.phi0);
  for (auto& mp : a) mp.v = {1.0, 1.0};
  for (auto& mp : b) mp.v = {-1.0, -1.0};

  // drained points nearest the top centre of each disc
  const int n_drained = std::max(1, static_cast<int>(std::lround(14.0 * s.scale * s.scale)));
  auto tag_top = [&](Particles& disc, Vec2 c) {
    const Vec2 top{c.x, c.y + r};
    std::vector<int> idx(disc.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto d2 = [&](int k) {
      const double dx = disc[k].x.x - top.x, dy = disc[k].x.y - top.y;
      return dx * dx + dy * dy;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return d2(i) < d2(j); });
    for (int k = 0; k < n_drained && k < static_cast<int>(idx.size()); ++k) disc[idx[k]].tag = 1;
  };
  tag_top(a, cA);
  tag_top(b, cB);
  s.particles = a;
  s.particles.insert(s.particles.end(), b.begin(), b.end());

  BoundaryCondition drained;
  drained.kind = BcKind::Pressure;
  drained.particle_tag = 1;
  s.bcs.push_back(drained);

  s.integ.regime = Regime::Dynamic;
  s.integ.dt = 2.5e-3;
  s.t_end = 0.35;
  for (int i = 0; i <= s.grid.nx; ++i) s.sample_nodes.push_back(s.grid.node_id(i, i));
  s.probes = {{"A", cA}, {"B", cB}};
  return s;
}

}  // namespace

Scene build_scene(Preset preset, const SceneOverrides& o) {
  if (o.scale && !(*o.scale > 0.0)) throw ConfigError("scale must be positive");
  Scene s;
  switch (preset) {
    case Preset::Terzaghi:
      s = terzaghi(o);
      break;
    case Preset::Footing:
      s = footing(o);
      break;
    case Preset::SelfWeight:
      s = self_weight(o);
      break;
    case Preset::Impact:
      s = impact(o);
      break;
  }
  if (o.stabilized) s.stabilized = *o.stabilized;
  if (o.basis) s.basis = *o.basis;
  if (o.dt) s.integ.dt = *o.dt;
  if (o.dt_growth) s.integ.dt_growth = *o.dt_growth;
  if (o.t_end) s.t_end = *o.t_end;
  if (o.steps) {
    if (*o.steps < 1) throw ConfigError("steps must be at least 1");
    s.t_end = static_cast<double>(*o.steps) * s.integ.dt;
  }
  for (const auto& m : s.materials) m.validate();
  s.integ.validate();
  validate_boundary_overlap(s.bcs);
  return s;
}

OscillationMetric oscillation_metric(const std::vector<double>& profile, double floor) {
  if (profile.size() < 3) throw MetricError("oscillation metric needs at least 3 samples");
  for (double v : profile)
    if (!std::isfinite(v)) throw MetricError("oscillation metric: non-finite sample");
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  const double range = *hi - *lo;
  OscillationMetric out;
  if (!(range > 0.0)) return out;
  int last_sign = 0;
  for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
    const double d = profile[k + 1] - profile[k];
    out.max_jump = std::max(out.max_jump, std::abs(d) / range);
    if (std::abs(d) <= floor * range) continue;
    const int sgn = d > 0.0 ? 1 : -1;
    if (last_sign != 0 && sgn != last_sign) ++out.sign_flips;
    last_sign = sgn;
  }
  return out;
}

}  // namespace stabmpm
