#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stabmpm/config.hpp"
#include "stabmpm/error.hpp"
#include "stabmpm/output.hpp"

using namespace stabmpm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stabmpm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STABMPM_CLI) + " -q " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, MinimalConfig) {
  const RunConfig c = parse_config("scene:\n  preset: footing\n");
  EXPECT_EQ(c.preset, Preset::Footing);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_EQ(c.cadence, 10);
  EXPECT_FALSE(c.scene.scale.has_value());
}

TEST(Config, UnitsAreConvertedToSi) {
  EXPECT_DOUBLE_EQ(parse_quantity("8.4 MPa", Dimension::Stress, "k"), 8.4e6);
  EXPECT_DOUBLE_EQ(parse_quantity("2.5 Mg/m3", Dimension::Density, "k"), 2500.0);
  EXPECT_DOUBLE_EQ(parse_quantity("1 ms", Dimension::Time, "k"), 1e-3);
  EXPECT_DOUBLE_EQ(parse_quantity("1e-3 Pa.s", Dimension::Viscosity, "k"), 1e-3);
  EXPECT_DOUBLE_EQ(parse_quantity("42", Dimension::Stress, "k"), 42.0);
  EXPECT_THROW(parse_quantity("3 furlongs", Dimension::Length, "k"), ConfigError);
  EXPECT_THROW(parse_quantity("3 s", Dimension::Stress, "k"), ConfigError);
  const RunConfig c = parse_config(
      "scene: {preset: impact}\n"
      "material:\n  lambda: 8.4 MPa\n  rho_s: 2.5 Mg/m3\n  gravity: [0, -9.81 m/s2]\n");
  EXPECT_DOUBLE_EQ(*c.scene.lambda, 8.4e6);
  EXPECT_DOUBLE_EQ(*c.scene.rho_s, 2500.0);
  EXPECT_DOUBLE_EQ(c.scene.gravity->y, -9.81);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(config_error("scene: {preset: footing}\nmaterial: {lamda: 1}\n").find("material.lamda"),
            std::string::npos);
  EXPECT_NE(config_error("scene: {preset: footing}\ntime: {dt: -1}\n").find("time.dt"), std::string::npos);
  EXPECT_NE(config_error("scene: {preset: dam}\n").find("scene.preset"), std::string::npos);
  EXPECT_NE(config_error("time: {dt: 1}\n").find("scene"), std::string::npos);
  EXPECT_NE(config_error("scene: {preset: footing}\ntime: {t_end: 1, steps: 3}\n").find("time"), std::string::npos);
  EXPECT_FALSE(config_error("scene: [unclosed\n").empty());
  EXPECT_THROW(load_config("/nonexistent/dir/c.yaml"), IoError);
}

TEST(Config, SerializeRoundTrip) {
  RunConfig c;
  c.preset = Preset::SelfWeight;
  c.scene.scale = 0.5;
  c.scene.level = 2;
  c.scene.stabilized = false;
  c.scene.basis = BasisKind::Linear;
  c.scene.dt = 0.1 / 3.0;
  c.scene.steps = 7;
  c.scene.lambda = 8.4e6;
  c.scene.k0 = 1.234567890123e-14;
  c.scene.gravity = Vec2{0.0, -9.81};
  c.scene.kozeny_carman = true;
  c.run.mode = JacobianMode::Consistent;
  c.run.newton.solver = SolverKind::FixedStress;
  c.run.newton.krylov.schur = SchurKind::Diagonal;
  c.run.newton.max_iters = 9;
  c.run.max_cuts = 2;
  c.output_dir = "runs/a";
  c.cadence = 3;
  c.vtk = false;
  c.profile_times = {0.1, 0.3};
  c.probes = {{"P1", {0.25, 1.0 / 3.0}}};
  const RunConfig back = parse_config(serialize_config(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Output, SnapshotNamingAndCadence) {
  EXPECT_EQ(snapshot_name(10), "snap_000010.vtk");
  int due = 0;
  for (long s = 0; s <= 35; ++s) due += snapshot_due(s, 10);
  EXPECT_EQ(due, 4);
  EXPECT_FALSE(snapshot_due(5, 0));
}

TEST(Output, SnapshotReadBackIsExact) {
  const fs::path dir = scratch_dir("snap");
  Scene s = build_scene(Preset::Terzaghi);
  for (std::size_t k = 0; k < s.particles.size(); ++k) {
    auto& mp = s.particles[k];
    mp.x.y += 1e-3 / 3.0;
    mp.p = std::sqrt(2.0) * 1e3 * k;
    mp.v = {1.0 / 7.0, -3.0e-9 * k};
  }
  const fs::path f = dir / snapshot_name(0);
  write_snapshot(f.string(), s, s.particles, 0, 0.0);
  const SnapshotData d = read_snapshot(f.string());
  ASSERT_EQ(d.points.size(), s.particles.size());
  for (const char* key : {"pressure", "excess_pressure", "porosity", "J"}) ASSERT_TRUE(d.scalars.count(key)) << key;
  for (const char* key : {"displacement", "velocity"}) ASSERT_TRUE(d.vectors.count(key)) << key;
  for (std::size_t k = 0; k < s.particles.size(); ++k) {
    EXPECT_EQ(d.points[k].y, s.particles[k].x.y);
    EXPECT_EQ(d.scalars.at("pressure")[k], s.particles[k].p);
    EXPECT_EQ(d.vectors.at("velocity")[k].y, s.particles[k].v.y);
    EXPECT_EQ(d.vectors.at("displacement")[k].y, s.particles[k].x.y - s.particles[k].X.y);
  }
  // deterministic bytes
  write_snapshot((dir / "again.vtk").string(), s, s.particles, 0, 0.0);
  EXPECT_EQ(slurp(f), slurp(dir / "again.vtk"));
}

TEST(Output, EmptySnapshotIsValid) {
  const fs::path dir = scratch_dir("empty");
  const Scene s = build_scene(Preset::Terzaghi);
  write_snapshot((dir / "e.vtk").string(), s, {}, 0, 0.0);
  const SnapshotData d = read_snapshot((dir / "e.vtk").string());
  EXPECT_TRUE(d.points.empty());
  std::ofstream((dir / "bad.vtk").string()) << "# vtk DataFile Version 3.0\n";
  EXPECT_THROW(read_snapshot((dir / "bad.vtk").string()), IoError);
}

// A configured run writes a complete, reproducible run directory.
TEST(Output, ExecuteRunWritesRunDirectory) {
  const fs::path a = scratch_dir("run_a"), b = scratch_dir("run_b");
  RunConfig c;
  c.preset = Preset::Terzaghi;
  c.scene.dt = 0.01;
  c.scene.steps = 35;
  c.output_dir = a.string();
  const RunSummary s = execute_run(c);
  ASSERT_TRUE(s.completed) << s.failure;
  EXPECT_EQ(s.steps, 35);
  ASSERT_TRUE(s.metric.has_value());
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(a)) snaps += e.path().extension() == ".vtk";
  EXPECT_EQ(snaps, 4);
  for (const char* f : {"run.log", "config.yaml", "solve_report.csv", "profile_000035.csv", "history_mid.csv"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_EQ(slurp(a / "profile_000035.csv").substr(0, 22), "Z,P_numerical,P_exact\n");
  EXPECT_EQ(slurp(a / "history_mid.csv").substr(0, 12), "t,p_excess\n0");
  c.output_dir = b.string();
  execute_run(c);
  for (const char* f : {"profile_000035.csv", "history_mid.csv", "solve_report.csv", "snap_000030.vtk"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const ReportSummary r = summarize_report(a.string());
  EXPECT_EQ(r.steps, 35);
  EXPECT_GE(r.fraction_within(4), 0.0);
  // recompute the worst final relative residual from the csv rows
  {
    std::ifstream in(a / "solve_report.csv");
    std::string line;
    std::getline(in, line);
    std::map<long, double> last;
    while (std::getline(in, line)) {
      std::stringstream ls(line);
      std::string step, iter, rel;
      std::getline(ls, step, ',');
      std::getline(ls, iter, ',');
      std::getline(ls, rel, ',');
      last[std::stol(step)] = std::stod(rel);
    }
    double worst = 0.0;
    for (const auto& [k, v] : last) worst = std::max(worst, v);
    EXPECT_EQ(static_cast<long>(last.size()), 35);
    EXPECT_DOUBLE_EQ(r.worst_final_residual, worst);
  }
  EXPECT_THROW(summarize_report((a / "missing").string()), IoError);
  // the written config reproduces the run settings
  EXPECT_TRUE(load_config((a / "config.yaml").string()).scene == c.scene);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("preset terzaghi --steps 2 --no-vtk -o " + (dir / "ok").string()), 0);
  EXPECT_EQ(run_cli("preset dam -o " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("preset terzaghi --basis cubic"), 2);
  EXPECT_EQ(run_cli("run " + (dir / "missing.yaml").string()), 2);
  std::ofstream((dir / "bad.yaml").string()) << "scene: {preset: terzaghi}\nsolver: {newton_tol: x}\n";
  EXPECT_EQ(run_cli("run " + (dir / "bad.yaml").string()), 2);
  // one Newton iteration with an unreachable tolerance and no step cuts
  std::ofstream((dir / "fail.yaml").string())
      << "scene: {preset: footing, scale: 0.5}\ntime: {steps: 2}\n"
      << "solver: {max_newton: 1, newton_tol: 1e-30, newton_abs: 0, max_cuts: 0}\n"
      << "output: {dir: " << (dir / "fail").string() << ", vtk: false}\n";
  EXPECT_EQ(run_cli("run " + (dir / "fail.yaml").string()), 3);
  EXPECT_EQ(run_cli("report " + (dir / "ok").string()), 0);
}
