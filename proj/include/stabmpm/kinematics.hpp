#pragma once

// Finite-strain kinematics in the updated-Lagrangian setting: every step is
// reckoned from the converged configuration at t_n, so the step works with
// the relative deformation gradient dF = F * F_n^{-1} = 1 + grad_n(u - u_n).

#include <string>

#include "stabmpm/dual.hpp"
#include "stabmpm/error.hpp"
#include "stabmpm/tensor.hpp"

namespace stabmpm {

struct KinematicState {
  Tensor2d F = Tensor2d::identity();
  double J = 1.0;
  Tensor2d dF = Tensor2d::identity();
  double dJ = 1.0;
};

// Spectral data of a symmetric 2x2 tensor: eigenvalues l1 >= l2 and the
// rotation angle of the eigenbasis, Q = [[cos, -sin], [sin, cos]].
struct SymEigen2 {
  double l1, l2, cos_t, sin_t;
};
SymEigen2 sym_eigen(const Tensor2d& a);

// (ln a - ln b) / (a - b), evaluated without cancellation for a ~ b.
double log_divided_difference(double a, double b);

// Hencky strain 1/2 ln(b) of a symmetric positive-definite tensor. Throws
// SingularKinematics on a non-positive eigenvalue; `who` names the caller's
// particle in the message.
Tensor2d spd_log(const Tensor2d& b, const std::string& who = {});

// Same on dual numbers; the derivative is the Daleckii-Krein formula, which
// stays smooth through repeated eigenvalues (b = I at the start of a step).
template <int N>
Tensor2<Dual<N>> spd_log(const Tensor2<Dual<N>>& b, const std::string& who = {}) {
  const Tensor2d b0 = value_of(b);
  const SymEigen2 e = sym_eigen(b0);
  if (!(e.l2 > 0.0)) {
    throw SingularKinematics("non-SPD left Cauchy-Green tensor" + (who.empty() ? "" : " at " + who));
  }
  const double c = e.cos_t, s = e.sin_t;
  const double g11 = 1.0 / e.l1, g22 = 1.0 / e.l2, g12 = log_divided_difference(e.l1, e.l2);
  const double ln1 = 0.5 * std::log(e.l1), ln2 = 0.5 * std::log(e.l2);

  // value: Q diag(ln1, ln2) Q^T
  Tensor2<Dual<N>> r;
  r(0, 0).v = c * c * ln1 + s * s * ln2;
  r(1, 1).v = s * s * ln1 + c * c * ln2;
  r(0, 1).v = r(1, 0).v = c * s * (ln1 - ln2);

  for (int k = 0; k < N; ++k) {
    const double bxx = b(0, 0).d[k], bxy = 0.5 * (b(0, 1).d[k] + b(1, 0).d[k]), byy = b(1, 1).d[k];
    if (bxx == 0.0 && bxy == 0.0 && byy == 0.0) continue;
    // D = Q^T db Q
    const double d11 = c * c * bxx + 2.0 * c * s * bxy + s * s * byy;
    const double d22 = s * s * bxx - 2.0 * c * s * bxy + c * c * byy;
    const double d12 = -c * s * bxx + (c * c - s * s) * bxy + c * s * byy;
    const double h11 = 0.5 * g11 * d11, h22 = 0.5 * g22 * d22, h12 = 0.5 * g12 * d12;
    // Q H Q^T
    r(0, 0).d[k] = c * c * h11 - 2.0 * c * s * h12 + s * s * h22;
    r(1, 1).d[k] = s * s * h11 + 2.0 * c * s * h12 + c * c * h22;
    const double off = c * s * (h11 - h22) + (c * c - s * s) * h12;
    r(0, 1).d[k] = off;
    r(1, 0).d[k] = off;
  }
  return r;
}

// dF = 1 + grad_n(du). Throws ElementInversion when det(dF) <= 0.
Tensor2d relative_deformation_gradient(const Tensor2d& grad_n_du);

// grad(f) = grad_n(f) . dF^{-1}, i.e. dF^{-T} applied to the column vector.
Vec2 pull_back_gradient(const Vec2& grad_n, const Tensor2d& dF);

template <class T>
Vector2<T> pull_back_gradient_t(const Vector2<T>& grad_n, const Tensor2<T>& dF_inv) {
  return transpose(dF_inv) * grad_n;
}

double update_volume(double V_n, double dJ);

// Compose the step into a full kinematic state from F_n and grad_n(du).
KinematicState compose_step(const Tensor2d& F_n, const Tensor2d& grad_n_du);

// Right stretch U = sqrt(F^T F) of the polar decomposition F = R U.
Tensor2d right_stretch(const Tensor2d& F);

}  // namespace stabmpm
