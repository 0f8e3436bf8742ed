#pragma once

// Terzaghi checks shared by the CLI `verify` command and the test suite.

#include <string>
#include <vector>

#include "stabmpm/scenarios.hpp"
#include "stabmpm/simulation.hpp"

namespace stabmpm {

struct TerzaghiProfile {
  std::vector<double> Z;  // depth below the drained top over H
  std::vector<double> P;  // p / w
  double T = 0.0;
};

// Normalized nodal pressure along the column after the last step.
TerzaghiProfile terzaghi_profile(const Simulation& sim);

// Run a Terzaghi scene to its t_end with the direct solver.
TerzaghiProfile run_terzaghi(const SceneOverrides& o, const RunOptions& opt = {});

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Single step to T = 1.8e-6, stabilized versus unstabilized.
CheckResult verify_terzaghi_contrast();
// Stabilized run to T = 0.1 in `steps` steps against the series solution.
CheckResult verify_terzaghi_accuracy(int steps = 50);

}  // namespace stabmpm
