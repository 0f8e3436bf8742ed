#pragma once

// Newmark (dynamic) and implicit Euler (quasi-static) rate updates and the
// stabilization parameter.

#include "stabmpm/error.hpp"

namespace stabmpm {

enum class Regime { Dynamic, QuasiStatic };

const char* to_string(Regime r);

struct IntegratorConfig {
  Regime regime = Regime::Dynamic;
  double beta = 0.3025;
  double gamma = 0.6;
  double dt = 1e-3;
  double dt_growth = 1.0;

  // Throws ConfigError.
  void validate() const;
  // d(rate)/d(value): gamma/(beta dt) or 1/dt.
  double rate_factor() const;
  // d(accel)/d(value): 1/(beta dt^2), zero when quasi-static.
  double accel_factor() const;
};

// Newmark: v = c_v (u - u_n) + v_hist, a = c_a (u - u_n) + a_hist. The
// history parts depend only on the state at t_n and are shared by u and p.
struct NewmarkHistory {
  double v_hist, a_hist;
};

inline NewmarkHistory newmark_history(double v_n, double a_n, const IntegratorConfig& c) {
  const double b = c.beta, g = c.gamma, dt = c.dt;
  return {(1.0 - g / b) * v_n + (1.0 - g / (2.0 * b)) * dt * a_n, -v_n / (b * dt) + (1.0 - 1.0 / (2.0 * b)) * a_n};
}

template <class T>
struct Rates {
  T first, second;
};

// Scalar Newmark update; applies per component to vectors.
template <class T>
Rates<T> newmark_rates(const T& du, double v_n, double a_n, const IntegratorConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("time step must be positive");
  const NewmarkHistory hst = newmark_history(v_n, a_n, c);
  return {(c.gamma / (c.beta * c.dt)) * du + hst.v_hist, (1.0 / (c.beta * c.dt * c.dt)) * du + hst.a_hist};
}

template <class T>
Rates<T> newmark_pressure_rates(const T& p, double p_n, double pdot_n, double pddot_n, const IntegratorConfig& c) {
  return newmark_rates(p - p_n, pdot_n, pddot_n, c);
}

template <class T>
T implicit_euler_rate(const T& du, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  return du * (1.0 / dt);
}

// Dynamic: max(2/(lambda + 2G) - (beta/gamma) 12 kappa dt / h^2, 0), which
// is 2 kappa / c_v - ... with c_v = kappa (lambda + 2G). Quasi-static: 1/(2G).
double stabilization_tau(Regime regime, double lambda, double G, double kappa, double h,
                         const IntegratorConfig& c);

}  // namespace stabmpm
