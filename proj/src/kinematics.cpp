#include "stabmpm/kinematics.hpp"

#include <cmath>
#include <sstream>

namespace stabmpm {

SymEigen2 sym_eigen(const Tensor2d& a) {
  const double xx = a(0, 0), yy = a(1, 1), xy = 0.5 * (a(0, 1) + a(1, 0));
  const double mean = 0.5 * (xx + yy);
  const double half_diff = 0.5 * (xx - yy);
  const double r = std::hypot(half_diff, xy);
  const double theta = 0.5 * std::atan2(2.0 * xy, xx - yy);
  return {mean + r, mean - r, std::cos(theta), std::sin(theta)};
}

double log_divided_difference(double a, double b) {
  const double delta = a - b;
  const double rel = delta / b;
  if (std::abs(rel) < 1e-6) {
    // series of log1p(rel)/rel
    return (1.0 - rel / 2.0 + rel * rel / 3.0) / b;
  }
  return std::log1p(rel) / delta;
}

Tensor2d spd_log(const Tensor2d& b, const std::string& who) {
  const SymEigen2 e = sym_eigen(b);
  if (!(e.l2 > 0.0)) {
    std::ostringstream msg;
    msg << "non-SPD tensor (eigenvalue " << e.l2 << ")";
    if (!who.empty()) msg << " at " << who;
    throw SingularKinematics(msg.str());
  }
  const double c = e.cos_t, s = e.sin_t;
  const double ln1 = 0.5 * std::log(e.l1), ln2 = 0.5 * std::log(e.l2);
  const double off = c * s * (ln1 - ln2);
  return {c * c * ln1 + s * s * ln2, off, off, s * s * ln1 + c * c * ln2};
}

Tensor2d relative_deformation_gradient(const Tensor2d& grad_n_du) {
  Tensor2d dF = Tensor2d::identity() + grad_n_du;
  const double dJ = det(dF);
  if (!(dJ > 0.0)) {
    std::ostringstream msg;
    msg << "element inversion: det(dF) = " << dJ;
    throw ElementInversion(msg.str());
  }
  return dF;
}

Vec2 pull_back_gradient(const Vec2& grad_n, const Tensor2d& dF) {
  const double dJ = det(dF);
  if (!(std::abs(dJ) > 0.0) || !std::isfinite(dJ)) {
    throw ElementInversion("singular relative deformation gradient");
  }
  return transpose(inverse(dF)) * grad_n;
}

double update_volume(double V_n, double dJ) {
  if (!(V_n > 0.0) || !(dJ > 0.0)) {
    std::ostringstream msg;
    msg << "non-positive volume update (V_n = " << V_n << ", dJ = " << dJ << ")";
    throw InvalidState(msg.str());
  }
  return dJ * V_n;
}

KinematicState compose_step(const Tensor2d& F_n, const Tensor2d& grad_n_du) {
  KinematicState k;
  k.dF = relative_deformation_gradient(grad_n_du);
  k.dJ = det(k.dF);
  k.F = k.dF * F_n;
  k.J = det(k.F);
  return k;
}

Tensor2d right_stretch(const Tensor2d& F) {
  // sqrt of the SPD tensor C: U = (C + sqrt(det C) I) / sqrt(tr C + 2 sqrt(det C))
  const Tensor2d C = transpose(F) * F;
  const double s = std::sqrt(det(C));
  const double t = std::sqrt(trace(C) + 2.0 * s);
  Tensor2d U = C + s * Tensor2d::identity();
  U *= 1.0 / t;
  return U;
}

}  // namespace stabmpm
