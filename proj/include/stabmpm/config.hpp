#pragma once

// Run configuration: YAML with nested sections and unit-suffixed quantities
// ("8.4 MPa", "2.5 Mg/m3"). The grammar is documented in docs/config.md.

#include <string>
#include <vector>

#include "stabmpm/scenarios.hpp"
#include "stabmpm/simulation.hpp"

namespace stabmpm {

struct RunConfig {
  Preset preset = Preset::Terzaghi;
  SceneOverrides scene;
  RunOptions run;
  std::string output_dir = "out";
  int cadence = 10;  // snapshot every N steps
  bool vtk = true;
  std::vector<double> profile_times;  // empty: final time only
  std::vector<ProbeSpec> probes;      // empty: the preset's probes

  bool operator==(const RunConfig&) const = default;
};

// Throws ConfigError with line/column for syntax errors and the key path
// for unknown keys and invalid values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // IoError if unreadable

// SI values, no unit suffixes. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

// "8.4 MPa" -> 8.4e6 for a quantity of the given dimension.
enum class Dimension { None, Stress, Length, Time, Density, Area, Viscosity, Acceleration };
double parse_quantity(const std::string& text, Dimension dim, const std::string& key);

}  // namespace stabmpm
