#pragma once

// Step driver: the four-stage cycle (p2g, Newton solve on the grid,
// particle update, convection) with step cutting on failure.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stabmpm/assembly.hpp"
#include "stabmpm/newton.hpp"
#include "stabmpm/scenarios.hpp"

namespace stabmpm {

// Everything one step needs, built from the state at t_n. Not copyable:
// `ctx` points into the other members.
struct StepProblem {
  double t_n = 0.0, dt = 0.0;
  long step = 0;
  TransferPlan plan;
  NodalState prev;
  NodalConstraints constraints;
  DofMap dofs;
  NeumannContribution neumann;
  AssemblyContext ctx;
  TrialState trial;  // initial guess with prescribed values in place

  StepProblem() = default;
  StepProblem(const StepProblem&) = delete;
  StepProblem& operator=(const StepProblem&) = delete;
};

struct RunOptions {
  NewtonOptions newton;
  JacobianMode mode = JacobianMode::Frozen;
  int max_cuts = 10;

  bool operator==(const RunOptions&) const = default;
};

struct StepRecord {
  long step = 0;
  double t = 0.0;  // time reached
  double dt = 0.0;
  int cuts = 0;
  SolveReport report;
  std::vector<std::string> failures;  // messages of the attempts that were cut
};

class Simulation {
 public:
  explicit Simulation(Scene scene);

  // Build the step problem from the current state (no state change).
  std::unique_ptr<StepProblem> prepare(double dt, const RunOptions& opt = {}) const;

  // One converged step, halving dt on StepFailure up to opt.max_cuts times.
  // Throws NonConvergence once the cuts are exhausted.
  StepRecord advance(const RunOptions& opt = {}, const LinearSolveHook& hook = nullptr);

  bool finished() const { return t_ >= scene_.t_end * (1.0 - 1e-12); }
  double time() const { return t_; }
  long step() const { return step_; }
  double next_dt() const { return dt_; }

  const Scene& scene() const { return scene_; }
  const Particles& particles() const { return scene_.particles; }
  const NodalState& nodal() const { return nodal_; }
  const BackgroundGrid& grid() const { return scene_.grid; }

  // Nodal pressure along the scene's sampling line (active nodes only) and
  // the node positions at which it was sampled.
  std::vector<double> sampled_pressure(std::vector<Vec2>* positions = nullptr) const;

  // Particle closest to a point (current configuration).
  int nearest_particle(const Vec2& x) const;

 private:
  void commit(const StepProblem& prob);

  Scene scene_;
  std::vector<LoadedFace> faces_;
  NodalState nodal_;
  double t_ = 0.0;
  double dt_ = 0.0;
  long step_ = 0;
};

}  // namespace stabmpm
