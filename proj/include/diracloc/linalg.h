#pragma once

/// Small fixed-size complex linear algebra for 2x2 first-order systems.

#include <array>
#include <cmath>
#include <complex>

namespace diracloc {

using cplx = std::complex<double>;

/// Two-component spinor (up, down).
struct Vec2 {
  cplx up{0.0};
  cplx down{0.0};

  double norm() const { return std::sqrt(std::norm(up) + std::norm(down)); }
  Vec2 operator*(cplx s) const { return {up * s, down * s}; }
  Vec2 operator+(const Vec2& o) const { return {up + o.up, down + o.down}; }
  Vec2 operator-(const Vec2& o) const { return {up - o.up, down - o.down}; }
};

/// Row-major 2x2 complex matrix [[a, b], [c, d]].
struct Mat2 {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static Mat2 identity() { return {}; }
  static Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }
  static Mat2 from_columns(const Vec2& first, const Vec2& second) {
    return {first.up, second.up, first.down, second.down};
  }
  /// [[cos t, sin t], [-sin t, cos t]].
  static Mat2 rotation(double t) {
    return {std::cos(t), std::sin(t), -std::sin(t), std::cos(t)};
  }

  cplx det() const { return a * d - b * c; }
  cplx trace() const { return a + d; }
  Vec2 column(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }

  Mat2 inverse() const {
    const cplx inv = 1.0 / det();
    return {d * inv, -b * inv, -c * inv, a * inv};
  }
  Mat2 transpose() const { return {a, c, b, d}; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Vec2 operator*(const Vec2& v) const { return {a * v.up + b * v.down, c * v.up + d * v.down}; }
  Mat2 operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }

  double frobenius() const {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  }

  /// Largest singular value.
  double op_norm() const {
    const double f2 = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    const double dt = std::abs(det());
    const double disc = std::max(0.0, f2 * f2 - 4.0 * dt * dt);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
  }

  bool finite() const {
    for (const cplx& x : {a, b, c, d}) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    }
    return true;
  }
};

/// Operator norm of the difference, used for matrix comparisons in tests and checks.
inline double distance(const Mat2& x, const Mat2& y) { return (x - y).op_norm(); }

/// Wronskian u1^up u2^down - u2^up u1^down.
inline cplx wronskian(const Vec2& u1, const Vec2& u2) { return u1.up * u2.down - u2.up * u1.down; }

}  // namespace diracloc
