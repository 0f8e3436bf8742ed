// stabmpm command-line driver.
//
//   stabmpm run <config.yaml> [-o dir]
//   stabmpm preset <name> [--scale s] [--stabilized|--unstabilized] [--basis gimp|linear] ...
//   stabmpm verify terzaghi
//   stabmpm report <run-dir>
//
// Exit codes: 0 success, 2 configuration or IO error, 3 solver failure.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "stabmpm/config.hpp"
#include "stabmpm/error.hpp"
#include "stabmpm/output.hpp"
#include "stabmpm/verify.hpp"

using namespace stabmpm;

namespace {

constexpr int kOk = 0, kConfig = 2, kSolver = 3;

int finish_run(const RunConfig& cfg, bool quiet) {
  const RunSummary s = execute_run(cfg, quiet ? nullptr : &std::cerr);
  std::cout << "steps " << s.steps << ", t = " << s.t << (s.completed ? ", completed" : ", incomplete") << "\n";
  if (s.metric)
    std::cout << "oscillation metric: sign flips " << s.metric->sign_flips << ", max jump " << s.metric->max_jump
              << "\n";
  std::cout << "output in " << cfg.output_dir << "\n";
  if (!s.completed) {
    std::cerr << "solver failure: " << s.failure << "\n";
    return kSolver;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized material point solver for coupled poromechanics"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "No per-step progress on stderr");

  auto* run = app.add_subcommand("run", "Run a YAML configuration");
  std::string config_path, run_out;
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("-o,--output", run_out, "Override output.dir");

  auto* preset = app.add_subcommand("preset", "Run a built-in scene");
  std::string preset_name, basis, solver, preset_out = "out";
  std::optional<double> scale, dt, t_end;
  std::optional<int> level;
  std::optional<long> steps;
  bool stab = false, unstab = false, no_vtk = false;
  int cadence = 10;
  preset->add_option("name", preset_name, "terzaghi | footing | self_weight | impact")->required();
  preset->add_option("--scale", scale, "Resolution factor (h = h0 / scale)");
  preset->add_option("--level", level, "Discretization level (terzaghi, self_weight)");
  auto* f_stab = preset->add_flag("--stabilized", stab, "Enable stabilization (default)");
  preset->add_flag("--unstabilized", unstab, "Disable stabilization")->excludes(f_stab);
  preset->add_option("--basis", basis, "gimp | linear")->check(CLI::IsMember({"gimp", "linear"}));
  preset->add_option("--solver", solver, "direct | fixed_stress")->check(CLI::IsMember({"direct", "fixed_stress"}));
  preset->add_option("--steps", steps, "Number of steps (t_end = steps * dt)");
  preset->add_option("--t-end", t_end, "End time [s]");
  preset->add_option("--dt", dt, "Time step [s]");
  preset->add_option("-o,--output", preset_out, "Output directory");
  preset->add_option("--cadence", cadence, "Snapshot every N steps")->check(CLI::PositiveNumber);
  preset->add_flag("--no-vtk", no_vtk, "Skip VTK snapshots");

  auto* verify = app.add_subcommand("verify", "Run a built-in verification");
  std::string what;
  verify->add_option("case", what, "terzaghi")->required()->check(CLI::IsMember({"terzaghi"}));

  auto* report = app.add_subcommand("report", "Summarize the solve report of a run directory");
  std::string report_dir;
  report->add_option("run_dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      RunConfig cfg = load_config(config_path);
      if (!run_out.empty()) cfg.output_dir = run_out;
      return finish_run(cfg, quiet);
    }
    if (*preset) {
      RunConfig cfg;
      cfg.preset = parse_preset(preset_name);
      cfg.scene.scale = scale;
      cfg.scene.level = level;
      if (stab) cfg.scene.stabilized = true;
      if (unstab) cfg.scene.stabilized = false;
      if (!basis.empty()) cfg.scene.basis = basis == "gimp" ? BasisKind::GIMP : BasisKind::Linear;
      if (solver == "fixed_stress") cfg.run.newton.solver = SolverKind::FixedStress;
      cfg.scene.steps = steps;
      cfg.scene.t_end = t_end;
      cfg.scene.dt = dt;
      cfg.output_dir = preset_out;
      cfg.cadence = cadence;
      cfg.vtk = !no_vtk;
      return finish_run(cfg, quiet);
    }
    if (*verify) {
      bool ok = true;
      for (const CheckResult& r : {verify_terzaghi_contrast(), verify_terzaghi_accuracy()}) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.pass;
      }
      return ok ? kOk : kSolver;
    }
    if (*report) {
      const ReportSummary s = summarize_report(report_dir);
      std::cout << "steps " << s.steps << "\n";
      std::cout << "newton iterations " << s.newton_iters << " (max per step " << s.max_newton << ")\n";
      if (s.steps > 0) std::cout << "mean per step " << static_cast<double>(s.newton_iters) / s.steps << "\n";
      std::cout << "steps within 4 iterations " << 100.0 * s.fraction_within(4) << "%\n";
      std::cout << "krylov iterations " << s.krylov_iters << "\n";
      std::cout << "worst final relative residual " << s.worst_final_residual << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  }
  return kOk;
}
