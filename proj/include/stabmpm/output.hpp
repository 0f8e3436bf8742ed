#pragma once

// Run directory writers (VTK snapshots, CSV profiles/histories, solve
// reports, run log) and the configured run driver. File layouts are
// documented in docs/outputs.md.

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stabmpm/config.hpp"
#include "stabmpm/scenarios.hpp"
#include "stabmpm/simulation.hpp"

namespace stabmpm {

std::string snapshot_name(long step);  // snap_000010.vtk
bool snapshot_due(long step, int cadence);

// Legacy ASCII VTK point cloud with displacement, velocity, pressure,
// excess_pressure, porosity and J. Doubles are written with 17 digits.
void write_snapshot(const std::string& path, const Scene& scene, const Particles& mps, long step, double t);

struct SnapshotData {
  std::vector<Vec2> points;
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<Vec2>> vectors;
};
SnapshotData read_snapshot(const std::string& path);  // IoError on malformed files

// Terzaghi: Z, P_numerical, P_exact. Other scenes: x, y, p, p_excess.
void write_profile_csv(const std::string& path, const Simulation& sim);

struct ProbeSample {
  double t;
  std::optional<double> p_excess;  // missing when no particle is near the probe
};
struct ProbeHistory {
  ProbeSpec probe;
  std::vector<ProbeSample> samples;
};

// Excess pressure of the particle nearest to the probe, missing when that
// particle is farther than one cell.
std::optional<double> sample_probe(const Simulation& sim, const ProbeSpec& probe);
void write_history_csv(const std::string& path, const ProbeHistory& h);

void write_solve_report(const std::string& path, const std::vector<StepRecord>& steps);

struct RunSummary {
  bool completed = false;
  std::string failure;
  long steps = 0;
  double t = 0.0;
  std::optional<OscillationMetric> metric;  // of the final sampled profile
};

// Builds the scene, runs it to t_end and writes the run directory. Solver
// failures are recorded in the summary and the log; configuration and IO
// errors propagate.
RunSummary execute_run(const RunConfig& cfg, std::ostream* progress = nullptr);

struct ReportSummary {
  long steps = 0;
  long newton_iters = 0;
  int max_newton = 0;
  long krylov_iters = 0;
  double worst_final_residual = 0.0;
  double fraction_within(int iters) const;
  std::vector<int> iters_per_step;
};
ReportSummary summarize_report(const std::string& run_dir);  // IoError if solve_report.csv is missing

}  // namespace stabmpm
