#include "stabmpm/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace stabmpm {

const char* to_string(Regime r) { return r == Regime::Dynamic ? "dynamic" : "quasi_static"; }

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt must be positive");
  if (!(dt_growth >= 1.0)) throw ConfigError("time.dt_growth must be >= 1");
  if (regime == Regime::Dynamic && !(2.0 * beta >= gamma && gamma >= 0.5))
    throw ConfigError("time: Newmark parameters must satisfy 2 beta >= gamma >= 0.5");
}

double IntegratorConfig::rate_factor() const {
  return regime == Regime::Dynamic ? gamma / (beta * dt) : 1.0 / dt;
}

double IntegratorConfig::accel_factor() const {
  return regime == Regime::Dynamic ? 1.0 / (beta * dt * dt) : 0.0;
}

double stabilization_tau(Regime regime, double lambda, double G, double kappa, double h,
                         const IntegratorConfig& c) {
  if (regime == Regime::QuasiStatic) return 1.0 / (2.0 * G);
  const double t = 2.0 / (lambda + 2.0 * G) - (c.beta / c.gamma) * 12.0 * kappa * c.dt / (h * h);
  return std::max(t, 0.0);
}

}  // namespace stabmpm
