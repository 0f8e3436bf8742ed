#pragma once

// Small fixed-size 2D vector / rank-two tensor types. Templated on the scalar
// so the same kinematics and constitutive code runs on doubles and on the
// forward-mode dual numbers used for the Jacobian.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <type_traits>

namespace stabmpm {

template <class T>
struct Vector2;
template <class T>
struct Tensor2;

template <class T>
struct is_small_tensor : std::false_type {};
template <class T>
struct is_small_tensor<Vector2<T>> : std::true_type {};
template <class T>
struct is_small_tensor<Tensor2<T>> : std::true_type {};

// Anything that scales a vector/tensor: double, dual numbers.
template <class S>
concept ScalarLike = !is_small_tensor<std::remove_cvref_t<S>>::value;

template <class T>
struct Vector2 {
  T x{}, y{};

  constexpr Vector2() = default;
  constexpr Vector2(T x_, T y_) : x(x_), y(y_) {}

  T& operator[](int i) { return i == 0 ? x : y; }
  const T& operator[](int i) const { return i == 0 ? x : y; }
  bool operator==(const Vector2&) const = default;

  Vector2& operator+=(const Vector2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vector2& operator-=(const Vector2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  template <class S>
  Vector2& operator*=(const S& s) {
    x *= s;
    y *= s;
    return *this;
  }
};

template <class T>
Vector2<T> operator+(Vector2<T> a, const Vector2<T>& b) {
  return a += b;
}
template <class T>
Vector2<T> operator-(Vector2<T> a, const Vector2<T>& b) {
  return a -= b;
}
template <class T>
Vector2<T> operator-(const Vector2<T>& a) {
  return {-a.x, -a.y};
}
template <class T, ScalarLike S>
auto operator*(const S& s, const Vector2<T>& a) -> Vector2<decltype(s * a.x)> {
  return {s * a.x, s * a.y};
}
template <class T, ScalarLike S>
auto operator*(const Vector2<T>& a, const S& s) -> Vector2<decltype(a.x * s)> {
  return {a.x * s, a.y * s};
}
template <class T, class U>
auto dot(const Vector2<T>& a, const Vector2<U>& b) {
  return a.x * b.x + a.y * b.y;
}

// Row-major 2x2 tensor: c = {xx, xy, yx, yy}.
template <class T>
struct Tensor2 {
  std::array<T, 4> c{};

  constexpr Tensor2() = default;
  constexpr Tensor2(T xx, T xy, T yx, T yy) : c{xx, xy, yx, yy} {}

  static Tensor2 identity() { return Tensor2(T(1.0), T(0.0), T(0.0), T(1.0)); }
  static Tensor2 zero() { return Tensor2(T(0.0), T(0.0), T(0.0), T(0.0)); }
  static Tensor2 diag(T a, T b) { return Tensor2(a, T(0.0), T(0.0), b); }

  T& operator()(int i, int j) { return c[2 * i + j]; }
  const T& operator()(int i, int j) const { return c[2 * i + j]; }

  Tensor2& operator+=(const Tensor2& o) {
    for (int k = 0; k < 4; ++k) c[k] += o.c[k];
    return *this;
  }
  Tensor2& operator-=(const Tensor2& o) {
    for (int k = 0; k < 4; ++k) c[k] -= o.c[k];
    return *this;
  }
  template <class S>
  Tensor2& operator*=(const S& s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <class T>
Tensor2<T> operator+(Tensor2<T> a, const Tensor2<T>& b) {
  return a += b;
}
template <class T>
Tensor2<T> operator-(Tensor2<T> a, const Tensor2<T>& b) {
  return a -= b;
}
template <class T, ScalarLike S>
auto operator*(const S& s, const Tensor2<T>& a) -> Tensor2<decltype(s * a.c[0])> {
  return {s * a.c[0], s * a.c[1], s * a.c[2], s * a.c[3]};
}
template <class T, ScalarLike S>
auto operator*(const Tensor2<T>& a, const S& s) -> Tensor2<decltype(a.c[0] * s)> {
  return s * a;
}

template <class T, class U>
auto operator*(const Tensor2<T>& a, const Tensor2<U>& b) -> Tensor2<decltype(a.c[0] * b.c[0])> {
  return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
          a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

template <class T, class U>
auto operator*(const Tensor2<T>& a, const Vector2<U>& v) -> Vector2<decltype(a.c[0] * v.x)> {
  return {a(0, 0) * v.x + a(0, 1) * v.y, a(1, 0) * v.x + a(1, 1) * v.y};
}

template <class T>
Tensor2<T> transpose(const Tensor2<T>& a) {
  return {a(0, 0), a(1, 0), a(0, 1), a(1, 1)};
}
template <class T>
T det(const Tensor2<T>& a) {
  return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
}
template <class T>
T trace(const Tensor2<T>& a) {
  return a(0, 0) + a(1, 1);
}
template <class T>
Tensor2<T> inverse(const Tensor2<T>& a) {
  const T d = det(a);
  return {a(1, 1) / d, -a(0, 1) / d, -a(1, 0) / d, a(0, 0) / d};
}
template <class T>
Tensor2<T> sym(const Tensor2<T>& a) {
  const T off = 0.5 * (a(0, 1) + a(1, 0));
  return {a(0, 0), off, off, a(1, 1)};
}
template <class T, class U>
auto outer(const Vector2<T>& a, const Vector2<U>& b) -> Tensor2<decltype(a.x * b.x)> {
  return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}
template <class T, class U>
auto ddot(const Tensor2<T>& a, const Tensor2<U>& b) {
  return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2] + a.c[3] * b.c[3];
}

using Vec2 = Vector2<double>;
using Tensor2d = Tensor2<double>;

inline double max_abs(const Tensor2d& a) {
  double m = 0.0;
  for (double v : a.c) m = std::max(m, std::abs(v));
  return m;
}
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

inline std::ostream& operator<<(std::ostream& os, const Tensor2d& a) {
  return os << "[[" << a(0, 0) << ", " << a(0, 1) << "], [" << a(1, 0) << ", " << a(1, 1) << "]]";
}
inline std::ostream& operator<<(std::ostream& os, const Vec2& v) {
  return os << "(" << v.x << ", " << v.y << ")";
}

}  // namespace stabmpm
