#pragma once

// Forward-mode dual number with a fixed number of derivative slots. Used to
// differentiate the per-particle residual contributions with respect to the
// local nodal unknowns (up to 3x3 nodes x {u_x, u_y, p} = 27 slots).

#include <array>
#include <cmath>

#include "stabmpm/tensor.hpp"

namespace stabmpm {

template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit lift

  static Dual variable(double value, int slot) {
    Dual r(value);
    r.d[slot] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int k = 0; k < N; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int k = 0; k < N; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int k = 0; k < N; ++k) d[k] = d[k] * o.v + v * o.d[k];
    v *= o.v;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int k = 0; k < N; ++k) d[k] = (d[k] - q * o.d[k]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double s) {
    v += s;
    return *this;
  }
  Dual& operator-=(double s) {
    v -= s;
    return *this;
  }
};

template <int N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <int N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <int N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <int N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <int N>
Dual<N> operator+(Dual<N> a, double b) { return a += b; }
template <int N>
Dual<N> operator+(double a, Dual<N> b) { return b += a; }
template <int N>
Dual<N> operator-(Dual<N> a, double b) { return a -= b; }
template <int N>
Dual<N> operator-(double a, const Dual<N>& b) {
  Dual<N> r;
  r.v = a - b.v;
  for (int k = 0; k < N; ++k) r.d[k] = -b.d[k];
  return r;
}
template <int N>
Dual<N> operator-(const Dual<N>& a) { return 0.0 - a; }
template <int N>
Dual<N> operator*(Dual<N> a, double b) { return a *= b; }
template <int N>
Dual<N> operator*(double a, Dual<N> b) { return b *= a; }
template <int N>
Dual<N> operator/(Dual<N> a, double b) { return a *= (1.0 / b); }
template <int N>
Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) /= b; }

template <int N>
Dual<N> log(const Dual<N>& a) {
  Dual<N> r;
  r.v = std::log(a.v);
  const double inv = 1.0 / a.v;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * inv;
  return r;
}

template <int N>
Dual<N> exp(const Dual<N>& a) {
  Dual<N> r;
  r.v = std::exp(a.v);
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * r.v;
  return r;
}

// Value without derivative information: used for the terms that are
// intentionally left unlinearized.
inline double detach(double a) { return a; }
inline Vec2 detach(const Vec2& a) { return a; }
template <int N>
Dual<N> detach(const Dual<N>& a) { return Dual<N>(a.v); }
template <int N>
Vector2<Dual<N>> detach(const Vector2<Dual<N>>& a) { return {detach(a.x), detach(a.y)}; }

inline double value_of(double a) { return a; }
template <int N>
double value_of(const Dual<N>& a) { return a.v; }

template <class T>
Tensor2d value_of(const Tensor2<T>& a) {
  return {value_of(a.c[0]), value_of(a.c[1]), value_of(a.c[2]), value_of(a.c[3])};
}
template <class T>
Vec2 value_of(const Vector2<T>& a) {
  return {value_of(a.x), value_of(a.y)};
}

template <class T>
Tensor2<T> lift(const Tensor2d& a) {
  return {T(a.c[0]), T(a.c[1]), T(a.c[2]), T(a.c[3])};
}
template <class T>
Vector2<T> lift(const Vec2& a) {
  return {T(a.x), T(a.y)};
}

// 9 nodes x {u_x, u_y, p}: the widest per-particle GIMP stencil.
using ADouble = Dual<27>;

}  // namespace stabmpm
