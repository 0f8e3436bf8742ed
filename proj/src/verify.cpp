#include "stabmpm/verify.hpp"

#include <cmath>
#include <sstream>

namespace stabmpm {

TerzaghiProfile terzaghi_profile(const Simulation& sim) {
  const Scene& s = sim.scene();
  std::vector<Vec2> pos;
  const std::vector<double> p = sim.sampled_pressure(&pos);
  TerzaghiProfile out;
  out.T = s.c_v * sim.time() / (s.height * s.height);
  for (std::size_t k = 0; k < p.size(); ++k) {
    out.Z.push_back((s.height - pos[k].y) / s.height);
    out.P.push_back(p[k] / s.load);
  }
  return out;
}

TerzaghiProfile run_terzaghi(const SceneOverrides& o, const RunOptions& opt) {
  Simulation sim(build_scene(Preset::Terzaghi, o));
  while (!sim.finished()) sim.advance(opt);
  return terzaghi_profile(sim);
}

CheckResult verify_terzaghi_contrast() {
  CheckResult r;
  r.name = "terzaghi_contrast";
  SceneOverrides o;
  o.stabilized = true;
  const TerzaghiProfile st = run_terzaghi(o);
  o.stabilized = false;
  const TerzaghiProfile un = run_terzaghi(o);
  const OscillationMetric ms = oscillation_metric(st.P);
  const OscillationMetric mu = oscillation_metric(un.P);
  // elevation <= 0.9 H, i.e. depth Z >= 0.1
  double dev = 0.0;
  for (std::size_t k = 0; k < st.Z.size(); ++k)
    if (st.Z[k] >= 0.1 - 1e-12) dev = std::max(dev, std::abs(st.P[k] - 1.0));
  r.pass = ms.sign_flips <= 2 && dev <= 0.02 && mu.sign_flips >= 10;
  std::ostringstream os;
  os << "stabilized flips " << ms.sign_flips << " (<= 2), max |P-1| " << dev << " (<= 0.02); unstabilized flips "
     << mu.sign_flips << " (>= 10)";
  r.detail = os.str();
  return r;
}

CheckResult verify_terzaghi_accuracy(int steps) {
  CheckResult r;
  r.name = "terzaghi_accuracy";
  const Scene base = build_scene(Preset::Terzaghi);
  const double t_end = 0.1 * base.height * base.height / base.c_v;
  SceneOverrides o;
  o.stabilized = true;
  o.dt = t_end / steps;
  o.t_end = t_end;
  const TerzaghiProfile pr = run_terzaghi(o);
  double err = 0.0;
  for (std::size_t k = 0; k < pr.Z.size(); ++k) {
    if (pr.Z[k] <= 1e-12 || pr.Z[k] >= 1.0 - 1e-12) continue;  // interior nodes
    err = std::max(err, std::abs(pr.P[k] - terzaghi_exact(pr.Z[k], pr.T)));
  }
  r.pass = err <= 0.03 && steps >= 50;
  std::ostringstream os;
  os << steps << " steps to T = " << pr.T << ", max |P - P_exact| " << err << " (<= 0.03)";
  r.detail = os.str();
  return r;
}

}  // namespace stabmpm
