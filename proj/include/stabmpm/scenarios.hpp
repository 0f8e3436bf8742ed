#pragma once

// Built-in scenes, the Terzaghi series solution and the pressure
// oscillation metric.

#include <optional>
#include <string>
#include <vector>

#include "stabmpm/basis.hpp"
#include "stabmpm/constitutive.hpp"
#include "stabmpm/grid.hpp"
#include "stabmpm/integrator.hpp"
#include "stabmpm/particles.hpp"

namespace stabmpm {

// P(Z, T) = sum_{m=0}^{n-1} (2/M) sin(M Z) exp(-M^2 T), M = pi (2m + 1) / 2,
// with Z the depth below the drained top over H. n_terms <= 0 picks 20000
// terms for T < 1e-4 and 200 otherwise.
double terzaghi_exact(double Z, double T, int n_terms = 0);

struct ProbeSpec {
  std::string name;
  Vec2 x;

  bool operator==(const ProbeSpec&) const = default;
};

struct Scene {
  std::string name;
  BackgroundGrid grid;
  Particles particles;
  std::vector<MaterialParams> materials;
  std::vector<BoundaryCondition> bcs;
  IntegratorConfig integ;
  double t_end = 0.0;
  bool stabilized = true;
  BasisKind basis = BasisKind::GIMP;
  double scale = 1.0;
  int level = 1;
  bool undrained_first_step = false;

  std::vector<ProbeSpec> probes;
  std::vector<int> sample_nodes;  // grid line used for profiles and the oscillation metric

  // Excess pressure = p - rho_f |g| (hydro_top - y) when set, else p.
  std::optional<double> hydro_top;
  double rho_f_g = 0.0;

  // Terzaghi bookkeeping for dimensionless output.
  double load = 0.0;
  double height = 0.0;
  double c_v = 0.0;

  double excess_pressure(double p, const Vec2& x) const;
};

enum class Preset { Terzaghi, Footing, SelfWeight, Impact };

Preset parse_preset(const std::string& name);  // throws ConfigError
const char* to_string(Preset p);

struct SceneOverrides {
  std::optional<double> scale;
  std::optional<int> level;
  std::optional<bool> stabilized;
  std::optional<BasisKind> basis;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<long> steps;  // sets t_end = steps * dt
  std::optional<double> dt_growth;
  // material overrides (SI units)
  std::optional<double> lambda, G, alpha_vis, k0, phi0, mu_f, rho_s, rho_f;
  std::optional<Vec2> gravity;
  std::optional<bool> kozeny_carman;

  bool operator==(const SceneOverrides&) const = default;
};

Scene build_scene(Preset preset, const SceneOverrides& o = {});

struct OscillationMetric {
  int sign_flips = 0;
  double max_jump = 0.0;  // max |p_{k+1} - p_k| / (max p - min p)
};

// Differences below `floor` times the profile range carry no sign.
// Throws MetricError for fewer than 3 samples.
OscillationMetric oscillation_metric(const std::vector<double>& profile, double floor = 1e-6);

}  // namespace stabmpm
