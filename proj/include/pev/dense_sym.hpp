#pragma once

// Closed-form algebra for 2x2 matrices. Everything here is a pure value type.

#include <algorithm>
#include <cmath>
#include <utility>

#include "pev/error.hpp"

namespace pev {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend constexpr Vec2 operator*(double c, Vec2 a) { return {c * a.x1, c * a.x2}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }

/// Symmetric 2x2 matrix, upper triangle stored.
struct SymMat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }
  static constexpr SymMat2 diag(double d1, double d2) { return {d1, 0.0, d2}; }
  static constexpr SymMat2 scalar(double c) { return {c, 0.0, c}; }
  /// v v^T
  static constexpr SymMat2 outer(Vec2 v) { return {v.x1 * v.x1, v.x1 * v.x2, v.x2 * v.x2}; }

  constexpr double trace() const { return a11 + a22; }
  constexpr double det() const { return a11 * a22 - a12 * a12; }

  friend constexpr SymMat2 operator+(const SymMat2& a, const SymMat2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22};
  }
  friend constexpr SymMat2 operator-(const SymMat2& a, const SymMat2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22};
  }
  friend constexpr SymMat2 operator*(double c, const SymMat2& a) {
    return {c * a.a11, c * a.a12, c * a.a22};
  }
  friend constexpr Vec2 operator*(const SymMat2& a, Vec2 v) {
    return {a.a11 * v.x1 + a.a12 * v.x2, a.a12 * v.x1 + a.a22 * v.x2};
  }
  friend constexpr bool operator==(const SymMat2&, const SymMat2&) = default;
};

/// <A u, v>
constexpr double quad(const SymMat2& a, Vec2 u, Vec2 v) { return dot(a * u, v); }
constexpr double quad(const SymMat2& a, Vec2 u) { return dot(a * u, u); }

/// General (not necessarily symmetric) 2x2 matrix, row-major.
struct Mat2 {
  double m11 = 0.0, m12 = 0.0;
  double m21 = 0.0, m22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 from(const SymMat2& s) { return {s.a11, s.a12, s.a12, s.a22}; }

  constexpr double det() const { return m11 * m22 - m12 * m21; }

  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
  friend constexpr Mat2 operator*(double c, const Mat2& a) {
    return {c * a.m11, c * a.m12, c * a.m21, c * a.m22};
  }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend constexpr Vec2 operator*(const Mat2& a, Vec2 v) {
    return {a.m11 * v.x1 + a.m12 * v.x2, a.m21 * v.x1 + a.m22 * v.x2};
  }
};

/// Frobenius norm.
inline double frob(const SymMat2& a) {
  return std::sqrt(a.a11 * a.a11 + 2.0 * a.a12 * a.a12 + a.a22 * a.a22);
}
inline double frob(const Mat2& a) {
  return std::sqrt(a.m11 * a.m11 + a.m12 * a.m12 + a.m21 * a.m21 + a.m22 * a.m22);
}

/// Symmetric part; used to strip round-off asymmetry from products that are symmetric in exact arithmetic.
constexpr SymMat2 sym(const Mat2& a) { return {a.m11, 0.5 * (a.m12 + a.m21), a.m22}; }

/// Ordered eigenvalues (min, max).
inline std::pair<double, double> eig2(const SymMat2& a) {
  const double mean = 0.5 * (a.a11 + a.a22);
  const double rad = std::hypot(0.5 * (a.a11 - a.a22), a.a12);
  return {mean - rad, mean + rad};
}

inline double lambda_min(const SymMat2& a) { return eig2(a).first; }
inline double lambda_max(const SymMat2& a) { return eig2(a).second; }

/// Spectral norm.
inline double norm2(const SymMat2& a) {
  const auto [lo, hi] = eig2(a);
  return std::max(std::abs(lo), std::abs(hi));
}

/// Unit eigenvector of the largest eigenvalue.
inline Vec2 max_eigvec(const SymMat2& a) {
  const double phi = 0.5 * std::atan2(2.0 * a.a12, a.a11 - a.a22);
  return {std::cos(phi), std::sin(phi)};
}

inline constexpr double kSingularRelTol = 1e-14;

inline SymMat2 inv(const SymMat2& a) {
  const double d = a.det();
  const double scale = norm2(a);
  if (!(std::abs(d) > kSingularRelTol * scale * scale)) {
    throw Error(ErrorKind::SingularMatrix, "determinant below 1e-14*|A|^2");
  }
  return {a.a22 / d, -a.a12 / d, a.a11 / d};
}

inline Mat2 inv(const Mat2& a) {
  const double d = a.det();
  const double scale = frob(a);
  if (!(std::abs(d) > kSingularRelTol * scale * scale)) {
    throw Error(ErrorKind::SingularMatrix, "determinant below 1e-14*|A|^2");
  }
  return {a.m22 / d, -a.m12 / d, -a.m21 / d, a.m11 / d};
}

inline constexpr double kPsdTol = 1e-12;

/// Principal square root of a positive semidefinite matrix.
inline SymMat2 sqrt_psd(const SymMat2& a) {
  const auto [lo, hi] = eig2(a);
  if (lo < -kPsdTol) throw Error(ErrorKind::NotPSD, "smallest eigenvalue below -1e-12");
  const double rlo = std::sqrt(std::max(lo, 0.0));
  const double rhi = std::sqrt(std::max(hi, 0.0));
  if (hi == lo) return SymMat2::scalar(rhi);
  // S = rlo I + (rhi - rlo) v v^T with v the top eigenvector.
  return SymMat2::scalar(rlo) + (rhi - rlo) * SymMat2::outer(max_eigvec(a));
}

inline constexpr double kLoewnerTol = 1e-12;

/// A <= B in the Loewner order, i.e. lambda_min(B - A) >= -tol.
inline bool loewner_leq(const SymMat2& a, const SymMat2& b, double tol = kLoewnerTol) {
  return lambda_min(b - a) >= -tol;
}

/// Membership in M[mu0, mu1] = {A : mu0 I <= A <= mu1 I}.
inline bool in_bounds(const SymMat2& a, double mu0, double mu1, double tol = kLoewnerTol) {
  const auto [lo, hi] = eig2(a);
  return lo >= mu0 - tol && hi <= mu1 + tol;
}

}  // namespace pev
