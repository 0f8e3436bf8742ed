#include "stabmpm/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stabmpm/error.hpp"

namespace stabmpm {

namespace {

const std::map<Dimension, std::map<std::string, double>>& unit_table() {
  static const std::map<Dimension, std::map<std::string, double>> t = {
      {Dimension::None, {}},
      {Dimension::Stress, {{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}}},
      {Dimension::Length, {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}}},
      {Dimension::Time, {{"s", 1.0}, {"ms", 1e-3}}},
      {Dimension::Density, {{"kg/m3", 1.0}, {"Mg/m3", 1e3}, {"g/cm3", 1e3}}},
      {Dimension::Area, {{"m2", 1.0}}},
      {Dimension::Viscosity, {{"Pa.s", 1.0}, {"kPa.s", 1e3}, {"MPa.s", 1e6}}},
      {Dimension::Acceleration, {{"m/s2", 1.0}}},
  };
  return t;
}

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return {};
  std::ostringstream os;
  os << " (line " << m.line + 1 << ", column " << m.column + 1 << ")";
  return os.str();
}

[[noreturn]] void fail(const std::string& key, const std::string& what, const YAML::Node& n) {
  throw ConfigError(key + ": " + what + where(n));
}

void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(path.empty() ? "<root>" : path, "expected a mapping", map);
  for (const auto& kv : map) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key", kv.first);
  }
}

std::string scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(key, "expected a scalar", n);
  return n.Scalar();
}

double quantity(const YAML::Node& n, Dimension dim, const std::string& key) {
  try {
    return parse_quantity(scalar(n, key), dim, key);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + where(n));
  }
}

long integer(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') fail(key, "expected an integer, got '" + s + "'", n);
  return v;
}

bool boolean(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  if (s == "true" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "no" || s == "off") return false;
  fail(key, "expected true or false, got '" + s + "'", n);
}

Vec2 vector2(const YAML::Node& n, Dimension dim, const std::string& key) {
  if (!n.IsSequence() || n.size() != 2) fail(key, "expected a two-element list", n);
  return {quantity(n[0], dim, key + "[0]"), quantity(n[1], dim, key + "[1]")};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dim, const std::string& key) {
  const char* s = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s) throw ConfigError(key + ": expected a number, got '" + text + "'");
  std::string unit(end);
  const auto b = unit.find_first_not_of(" \t");
  unit = b == std::string::npos ? "" : unit.substr(b);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.pop_back();
  if (!std::isfinite(v)) throw ConfigError(key + ": value is not finite");
  if (unit.empty()) return v;
  const auto& units = unit_table().at(dim);
  const auto it = units.find(unit);
  if (it == units.end()) {
    std::string allowed;
    for (const auto& [u, f] : units) allowed += (allowed.empty() ? "" : ", ") + u;
    throw ConfigError(key + ": unit '" + unit + "' not accepted" +
                      (allowed.empty() ? " (dimensionless)" : " (expected one of " + allowed + ")"));
  }
  return v * it->second;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "config parse error at line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  RunConfig c;
  check_keys(root, "", {"scene", "time", "material", "solver", "output"});
  if (!root["scene"]) throw ConfigError("scene: missing section (scene.preset is required)");

  const YAML::Node sc = root["scene"];
  check_keys(sc, "scene", {"preset", "scale", "level", "stabilized", "basis"});
  if (!sc["preset"]) fail("scene.preset", "missing", sc);
  try {
    c.preset = parse_preset(scalar(sc["preset"], "scene.preset"));
  } catch (const ConfigError& e) {
    throw ConfigError("scene.preset: " + std::string(e.what()) + where(sc["preset"]));
  }
  if (sc["scale"]) {
    c.scene.scale = quantity(sc["scale"], Dimension::None, "scene.scale");
    if (!(*c.scene.scale > 0.0)) fail("scene.scale", "must be positive", sc["scale"]);
  }
  if (sc["level"]) c.scene.level = static_cast<int>(integer(sc["level"], "scene.level"));
  if (sc["stabilized"]) c.scene.stabilized = boolean(sc["stabilized"], "scene.stabilized");
  if (sc["basis"]) {
    const std::string b = scalar(sc["basis"], "scene.basis");
    if (b == "gimp") c.scene.basis = BasisKind::GIMP;
    else if (b == "linear") c.scene.basis = BasisKind::Linear;
    else fail("scene.basis", "expected gimp or linear, got '" + b + "'", sc["basis"]);
  }

  if (const YAML::Node t = root["time"]) {
    check_keys(t, "time", {"dt", "t_end", "steps", "dt_growth"});
    if (t["dt"]) {
      c.scene.dt = quantity(t["dt"], Dimension::Time, "time.dt");
      if (!(*c.scene.dt > 0.0)) fail("time.dt", "must be positive", t["dt"]);
    }
    if (t["t_end"]) c.scene.t_end = quantity(t["t_end"], Dimension::Time, "time.t_end");
    if (t["steps"]) {
      c.scene.steps = integer(t["steps"], "time.steps");
      if (*c.scene.steps < 1) fail("time.steps", "must be at least 1", t["steps"]);
    }
    if (t["dt_growth"]) c.scene.dt_growth = quantity(t["dt_growth"], Dimension::None, "time.dt_growth");
    if (c.scene.t_end && c.scene.steps) fail("time", "give either t_end or steps, not both", t);
  }

  if (const YAML::Node m = root["material"]) {
    check_keys(m, "material",
               {"lambda", "G", "alpha_vis", "k0", "phi0", "mu_f", "rho_s", "rho_f", "gravity", "kozeny_carman"});
    auto q = [&](const char* k, Dimension d, std::optional<double>& dst) {
      if (m[k]) dst = quantity(m[k], d, std::string("material.") + k);
    };
    q("lambda", Dimension::Stress, c.scene.lambda);
    q("G", Dimension::Stress, c.scene.G);
    q("alpha_vis", Dimension::Time, c.scene.alpha_vis);
    q("k0", Dimension::Area, c.scene.k0);
    q("phi0", Dimension::None, c.scene.phi0);
    q("mu_f", Dimension::Viscosity, c.scene.mu_f);
    q("rho_s", Dimension::Density, c.scene.rho_s);
    q("rho_f", Dimension::Density, c.scene.rho_f);
    if (m["gravity"]) c.scene.gravity = vector2(m["gravity"], Dimension::Acceleration, "material.gravity");
    if (m["kozeny_carman"]) c.scene.kozeny_carman = boolean(m["kozeny_carman"], "material.kozeny_carman");
  }

  if (const YAML::Node s = root["solver"]) {
    check_keys(s, "solver",
               {"linear", "schur", "jacobian", "newton_tol", "newton_abs", "max_newton", "krylov_tol", "max_krylov",
                "max_cuts"});
    auto& nw = c.run.newton;
    if (s["linear"]) {
      const std::string v = scalar(s["linear"], "solver.linear");
      if (v == "direct") nw.solver = SolverKind::Direct;
      else if (v == "fixed_stress") nw.solver = SolverKind::FixedStress;
      else fail("solver.linear", "expected direct or fixed_stress, got '" + v + "'", s["linear"]);
    }
    if (s["schur"]) {
      const std::string v = scalar(s["schur"], "solver.schur");
      if (v == "auto") nw.krylov.schur = SchurKind::Auto;
      else if (v == "fixed_stress") nw.krylov.schur = SchurKind::FixedStress;
      else if (v == "diagonal") nw.krylov.schur = SchurKind::Diagonal;
      else fail("solver.schur", "expected auto, fixed_stress or diagonal, got '" + v + "'", s["schur"]);
    }
    if (s["jacobian"]) {
      const std::string v = scalar(s["jacobian"], "solver.jacobian");
      if (v == "frozen") c.run.mode = JacobianMode::Frozen;
      else if (v == "consistent") c.run.mode = JacobianMode::Consistent;
      else fail("solver.jacobian", "expected frozen or consistent, got '" + v + "'", s["jacobian"]);
    }
    if (s["newton_tol"]) nw.rel_tol = quantity(s["newton_tol"], Dimension::None, "solver.newton_tol");
    if (s["newton_abs"]) nw.abs_floor = quantity(s["newton_abs"], Dimension::None, "solver.newton_abs");
    if (s["max_newton"]) nw.max_iters = static_cast<int>(integer(s["max_newton"], "solver.max_newton"));
    if (s["krylov_tol"]) nw.krylov.rel_tol = quantity(s["krylov_tol"], Dimension::None, "solver.krylov_tol");
    if (s["max_krylov"]) nw.krylov.max_iters = static_cast<int>(integer(s["max_krylov"], "solver.max_krylov"));
    if (s["max_cuts"]) c.run.max_cuts = static_cast<int>(integer(s["max_cuts"], "solver.max_cuts"));
    if (!(nw.rel_tol > 0.0)) fail("solver.newton_tol", "must be positive", s);
    if (nw.max_iters < 1) fail("solver.max_newton", "must be at least 1", s);
    if (nw.krylov.max_iters < 1) fail("solver.max_krylov", "must be at least 1", s);
    if (c.run.max_cuts < 0) fail("solver.max_cuts", "must be non-negative", s);
  }

  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"dir", "cadence", "vtk", "profile_times", "probes"});
    if (o["dir"]) c.output_dir = scalar(o["dir"], "output.dir");
    if (o["cadence"]) {
      c.cadence = static_cast<int>(integer(o["cadence"], "output.cadence"));
      if (c.cadence < 1) fail("output.cadence", "must be at least 1", o["cadence"]);
    }
    if (o["vtk"]) c.vtk = boolean(o["vtk"], "output.vtk");
    if (const YAML::Node pt = o["profile_times"]) {
      if (!pt.IsSequence()) fail("output.profile_times", "expected a list", pt);
      for (std::size_t i = 0; i < pt.size(); ++i)
        c.profile_times.push_back(
            quantity(pt[i], Dimension::Time, "output.profile_times[" + std::to_string(i) + "]"));
    }
    if (const YAML::Node pr = o["probes"]) {
      if (!pr.IsSequence()) fail("output.probes", "expected a list", pr);
      for (std::size_t i = 0; i < pr.size(); ++i) {
        const std::string path = "output.probes[" + std::to_string(i) + "]";
        check_keys(pr[i], path, {"name", "x"});
        if (!pr[i]["name"] || !pr[i]["x"]) fail(path, "needs name and x", pr[i]);
        c.probes.push_back({scalar(pr[i]["name"], path + ".name"), vector2(pr[i]["x"], Dimension::Length, path + ".x")});
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  const SceneOverrides& s = c.scene;
  os << "scene:\n  preset: " << to_string(c.preset) << "\n";
  if (s.scale) os << "  scale: " << fmt(*s.scale) << "\n";
  if (s.level) os << "  level: " << *s.level << "\n";
  if (s.stabilized) os << "  stabilized: " << (*s.stabilized ? "true" : "false") << "\n";
  if (s.basis) os << "  basis: " << (*s.basis == BasisKind::GIMP ? "gimp" : "linear") << "\n";

  if (s.dt || s.t_end || s.steps || s.dt_growth) {
    os << "time:\n";
    if (s.dt) os << "  dt: " << fmt(*s.dt) << "\n";
    if (s.t_end) os << "  t_end: " << fmt(*s.t_end) << "\n";
    if (s.steps) os << "  steps: " << *s.steps << "\n";
    if (s.dt_growth) os << "  dt_growth: " << fmt(*s.dt_growth) << "\n";
  }

  std::ostringstream mat;
  auto q = [&](const char* k, const std::optional<double>& v) {
    if (v) mat << "  " << k << ": " << fmt(*v) << "\n";
  };
  q("lambda", s.lambda);
  q("G", s.G);
  q("alpha_vis", s.alpha_vis);
  q("k0", s.k0);
  q("phi0", s.phi0);
  q("mu_f", s.mu_f);
  q("rho_s", s.rho_s);
  q("rho_f", s.rho_f);
  if (s.gravity) mat << "  gravity: [" << fmt(s.gravity->x) << ", " << fmt(s.gravity->y) << "]\n";
  if (s.kozeny_carman) mat << "  kozeny_carman: " << (*s.kozeny_carman ? "true" : "false") << "\n";
  if (!mat.str().empty()) os << "material:\n" << mat.str();

  const NewtonOptions& n = c.run.newton;
  os << "solver:\n";
  os << "  linear: " << to_string(n.solver) << "\n";
  os << "  schur: " << to_string(n.krylov.schur) << "\n";
  os << "  jacobian: " << (c.run.mode == JacobianMode::Frozen ? "frozen" : "consistent") << "\n";
  os << "  newton_tol: " << fmt(n.rel_tol) << "\n";
  os << "  newton_abs: " << fmt(n.abs_floor) << "\n";
  os << "  max_newton: " << n.max_iters << "\n";
  os << "  krylov_tol: " << fmt(n.krylov.rel_tol) << "\n";
  os << "  max_krylov: " << n.krylov.max_iters << "\n";
  os << "  max_cuts: " << c.run.max_cuts << "\n";

  YAML::Emitter dir;
  dir << YAML::DoubleQuoted << c.output_dir;
  os << "output:\n  dir: " << dir.c_str() << "\n";
  os << "  cadence: " << c.cadence << "\n";
  os << "  vtk: " << (c.vtk ? "true" : "false") << "\n";
  if (!c.profile_times.empty()) {
    os << "  profile_times: [";
    for (std::size_t i = 0; i < c.profile_times.size(); ++i) os << (i ? ", " : "") << fmt(c.profile_times[i]);
    os << "]\n";
  }
  if (!c.probes.empty()) {
    os << "  probes:\n";
    for (const auto& p : c.probes) {
      YAML::Emitter name;
      name << YAML::DoubleQuoted << p.name;
      os << "    - name: " << name.c_str() << "\n      x: [" << fmt(p.x.x) << ", " << fmt(p.x.y) << "]\n";
    }
  }
  return os.str();
}

}  // namespace stabmpm
