#include "stabmpm/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "stabmpm/error.hpp"
#include "stabmpm/kinematics.hpp"

namespace stabmpm {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06ld.vtk", step);
  return buf;
}

bool snapshot_due(long step, int cadence) { return cadence >= 1 && step % cadence == 0; }

void write_snapshot(const std::string& path, const Scene& scene, const Particles& mps, long step, double t) {
  std::ofstream out = open_out(path);
  const std::size_t n = mps.size();
  out << "# vtk DataFile Version 3.0\n";
  out << scene.name << " step " << step << " t " << num(t) << "\n";
  out << "ASCII\nDATASET POLYDATA\n";
  out << "POINTS " << n << " double\n";
  for (const auto& mp : mps) out << num(mp.x.x) << " " << num(mp.x.y) << " 0\n";
  if (n > 0) {
    out << "VERTICES " << n << " " << 2 * n << "\n";
    for (std::size_t k = 0; k < n; ++k) out << "1 " << k << "\n";
    out << "POINT_DATA " << n << "\n";
    auto vec = [&](const char* name, auto f) {
      out << "VECTORS " << name << " double\n";
      for (const auto& mp : mps) {
        const Vec2 v = f(mp);
        out << num(v.x) << " " << num(v.y) << " 0\n";
      }
    };
    auto sca = [&](const char* name, auto f) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (const auto& mp : mps) out << num(f(mp)) << "\n";
    };
    vec("displacement", [](const MaterialPoint& mp) { return mp.x - mp.X; });
    vec("velocity", [](const MaterialPoint& mp) { return mp.v; });
    sca("pressure", [](const MaterialPoint& mp) { return mp.p; });
    sca("excess_pressure", [&](const MaterialPoint& mp) { return scene.excess_pressure(mp.p, mp.x); });
    sca("porosity", [](const MaterialPoint& mp) { return mp.phi; });
    sca("J", [](const MaterialPoint& mp) { return det(mp.F); });
  }
  close_out(out, path);
}

SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  auto bad = [&](const std::string& what) { return IoError("malformed VTK file '" + path + "': " + what); };
  std::string line;
  for (int i = 0; i < 4; ++i)
    if (!std::getline(in, line)) throw bad("truncated header");
  if (line != "DATASET POLYDATA") throw bad("expected DATASET POLYDATA");
  SnapshotData d;
  std::string tok, type;
  std::size_t n = 0;
  if (!(in >> tok >> n >> type) || tok != "POINTS") throw bad("expected POINTS");
  d.points.resize(n);
  for (auto& p : d.points) {
    double z;
    if (!(in >> p.x >> p.y >> z)) throw bad("short POINTS block");
  }
  while (in >> tok) {
    if (tok == "VERTICES") {
      std::size_t a, b;
      in >> a >> b;
      for (std::size_t k = 0; k < b; ++k) in >> a;
    } else if (tok == "POINT_DATA") {
      std::size_t m;
      in >> m;
      if (m != n) throw bad("POINT_DATA count mismatch");
    } else if (tok == "VECTORS") {
      std::string name;
      in >> name >> type;
      auto& v = d.vectors[name];
      v.resize(n);
      for (auto& x : v) {
        double z;
        if (!(in >> x.x >> x.y >> z)) throw bad("short VECTORS " + name);
      }
    } else if (tok == "SCALARS") {
      std::string name, lut, def;
      int comps;
      in >> name >> type >> comps >> lut >> def;
      auto& v = d.scalars[name];
      v.resize(n);
      for (auto& x : v)
        if (!(in >> x)) throw bad("short SCALARS " + name);
    } else {
      throw bad("unexpected token '" + tok + "'");
    }
  }
  return d;
}

void write_profile_csv(const std::string& path, const Simulation& sim) {
  const Scene& s = sim.scene();
  std::vector<Vec2> pos;
  const std::vector<double> p = sim.sampled_pressure(&pos);
  std::ofstream out = open_out(path);
  if (s.name == "terzaghi") {
    const double T = s.c_v * sim.time() / (s.height * s.height);
    out << "Z,P_numerical,P_exact\n";
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double Z = (s.height - pos[k].y) / s.height;
      out << num(Z) << "," << num(p[k] / s.load) << "," << num(terzaghi_exact(Z, T)) << "\n";
    }
  } else {
    out << "x,y,p,p_excess\n";
    for (std::size_t k = 0; k < p.size(); ++k)
      out << num(pos[k].x) << "," << num(pos[k].y) << "," << num(p[k]) << ","
          << num(s.excess_pressure(p[k], pos[k])) << "\n";
  }
  close_out(out, path);
}

std::optional<double> sample_probe(const Simulation& sim, const ProbeSpec& probe) {
  const int k = sim.nearest_particle(probe.x);
  if (k < 0) return std::nullopt;
  const MaterialPoint& mp = sim.particles()[k];
  const Vec2 d = mp.x - probe.x;
  if (std::sqrt(d.x * d.x + d.y * d.y) > sim.grid().h) return std::nullopt;
  return sim.scene().excess_pressure(mp.p, mp.x);
}

void write_history_csv(const std::string& path, const ProbeHistory& h) {
  std::ofstream out = open_out(path);
  out << "t,p_excess\n";
  for (const auto& s : h.samples) out << num(s.t) << "," << (s.p_excess ? num(*s.p_excess) : std::string()) << "\n";
  close_out(out, path);
}

void write_solve_report(const std::string& path, const std::vector<StepRecord>& steps) {
  std::ofstream out = open_out(path);
  out << "step,iter,rel_residual,krylov_iters\n";
  for (const auto& r : steps) {
    const auto& rep = r.report;
    for (std::size_t k = 0; k < rep.rel_residual.size(); ++k) {
      const int kr = k < rep.krylov_iters.size() ? rep.krylov_iters[k] : 0;
      out << r.step << "," << k << "," << num(rep.rel_residual[k]) << "," << kr << "\n";
    }
  }
  close_out(out, path);
}

RunSummary execute_run(const RunConfig& cfg, std::ostream* progress) {
  Scene scene = build_scene(cfg.preset, cfg.scene);
  if (!cfg.probes.empty()) scene.probes = cfg.probes;
  if (cfg.cadence < 1) throw ConfigError("output.cadence: must be at least 1");

  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + cfg.output_dir + "'");
  const std::string log_path = (dir / "run.log").string();
  std::ofstream log = open_out(log_path);
  {
    const std::string cfg_path = (dir / "config.yaml").string();
    std::ofstream c = open_out(cfg_path);
    c << serialize_config(cfg);
    close_out(c, cfg_path);
  }

  std::vector<ProbeHistory> hist;
  for (const auto& p : scene.probes) hist.push_back({p, {}});
  Simulation sim(std::move(scene));
  const Scene& sc = sim.scene();
  log << "scene " << sc.name << " scale " << num(sc.scale) << " level " << sc.level << "\n";
  log << "grid " << sc.grid.nx << " x " << sc.grid.ny << " cells, h " << num(sc.grid.h) << "\n";
  log << "particles " << sc.particles.size() << ", basis " << to_string(sc.basis) << ", "
      << (sc.stabilized ? "stabilized" : "unstabilized") << ", " << to_string(sc.integ.regime) << "\n";
  log << "linear solver " << to_string(cfg.run.newton.solver) << ", t_end " << num(sc.t_end) << "\n";

  auto record_probes = [&]() {
    for (auto& h : hist) h.samples.push_back({sim.time(), sample_probe(sim, h.probe)});
  };
  auto snapshot = [&]() {
    if (cfg.vtk && snapshot_due(sim.step(), cfg.cadence))
      write_snapshot((dir / snapshot_name(sim.step())).string(), sim.scene(), sim.particles(), sim.step(),
                     sim.time());
  };
  auto profile = [&]() {
    char name[40];
    std::snprintf(name, sizeof name, "profile_%06ld.csv", sim.step());
    write_profile_csv((dir / name).string(), sim);
  };

  RunSummary sum;
  std::vector<StepRecord> records;
  std::size_t next_profile = 0;
  std::vector<double> ptimes = cfg.profile_times;
  std::sort(ptimes.begin(), ptimes.end());
  const double t_tol = 1e-12 * std::max(1.0, sc.t_end);
  record_probes();
  snapshot();
  try {
    while (!sim.finished()) {
      StepRecord r = sim.advance(cfg.run);
      log << "step " << r.step << " t " << num(r.t) << " dt " << num(r.dt) << " newton " << r.report.iterations()
          << " cuts " << r.cuts << "\n";
      for (const auto& f : r.failures) log << "  cut: " << f << "\n";
      for (const auto& w : r.report.warnings) log << "  warning: " << w << "\n";
      if (progress) *progress << "step " << r.step << " t=" << r.t << " newton=" << r.report.iterations() << "\n";
      records.push_back(std::move(r));
      record_probes();
      snapshot();
      bool wrote = false;
      while (next_profile < ptimes.size() && sim.time() >= ptimes[next_profile] - t_tol) {
        if (!wrote) profile();
        wrote = true;
        ++next_profile;
      }
    }
    sum.completed = true;
  } catch (const NonConvergence& e) {
    sum.failure = e.what();
    log << "failed: " << sum.failure << "\n";
  }
  sum.steps = sim.step();
  sum.t = sim.time();
  if (ptimes.empty() && sim.step() > 0) profile();

  const std::vector<double> pr = sim.sampled_pressure();
  if (pr.size() >= 3) {
    sum.metric = oscillation_metric(pr);
    log << "oscillation sign_flips " << sum.metric->sign_flips << " max_jump " << num(sum.metric->max_jump) << "\n";
  }
  log << (sum.completed ? "completed" : "incomplete") << " steps " << sum.steps << " t " << num(sum.t) << "\n";

  for (const auto& h : hist) write_history_csv((dir / ("history_" + h.probe.name + ".csv")).string(), h);
  write_solve_report((dir / "solve_report.csv").string(), records);
  close_out(log, log_path);
  return sum;
}

double ReportSummary::fraction_within(int iters) const {
  if (iters_per_step.empty()) return 0.0;
  const auto n = std::count_if(iters_per_step.begin(), iters_per_step.end(), [&](int k) { return k <= iters; });
  return static_cast<double>(n) / iters_per_step.size();
}

ReportSummary summarize_report(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "solve_report.csv").string();
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "step,iter,rel_residual,krylov_iters") throw IoError("unexpected header in '" + path + "'");
  ReportSummary s;
  long cur = -1;
  int last_iter = 0;
  double last_res = 0.0;
  auto flush = [&]() {
    if (cur < 0) return;
    s.iters_per_step.push_back(last_iter);
    s.newton_iters += last_iter;
    s.max_newton = std::max(s.max_newton, last_iter);
    s.worst_final_residual = std::max(s.worst_final_residual, last_res);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c, d;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c, ',') || !std::getline(ls, d))
      throw IoError("malformed row in '" + path + "': " + line);
    const long step = std::stol(a);
    if (step != cur) {
      flush();
      cur = step;
    }
    last_iter = std::stoi(b);
    last_res = std::stod(c);
    s.krylov_iters += std::stol(d);
  }
  flush();
  s.steps = static_cast<long>(s.iters_per_step.size());
  return s;
}

}  // namespace stabmpm
