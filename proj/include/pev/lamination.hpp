#pragma once

// Two-phase lamination algebra in 2D: rank-one laminates, the (theta, H)
// parametrization of laminates of A with base B, the harmonic/arithmetic
// mean bounds, and striped coefficient fields whose homogenized limit is a
// rank-one laminate.

#include <algorithm>
#include <cmath>
#include <utility>

#include "pev/dense_sym.hpp"
#include "pev/error.hpp"
#include "pev/mesh_fem.hpp"

namespace pev {

struct LaminateParams {
  /// Volume fraction of B.
  double theta = 0.5;
  /// Unit lamination normal.
  Vec2 e{1.0, 0.0};

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::Validation, "theta must lie in [0,1]");
    if (!(std::abs(norm(e) - 1.0) <= 1e-12)) throw Error(ErrorKind::Validation, "e must be a unit vector");
  }
};

struct GammaParams {
  double theta = 0.5;
  /// H >= 0 with tr(H) = 1.
  SymMat2 H = SymMat2::diag(1.0, 0.0);

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::Validation, "theta must lie in [0,1]");
    if (lambda_min(H) < -1e-12) throw Error(ErrorKind::Validation, "H must be positive semidefinite");
    if (!(std::abs(H.trace() - 1.0) <= 1e-12)) throw Error(ErrorKind::Validation, "tr(H) must equal 1");
  }
};

/// (1-theta) A + theta B - theta (1-theta) (A-B) e e^T (A-B) / e^T [theta A + (1-theta) B] e
inline SymMat2 laminate(const SymMat2& A, const SymMat2& B, const LaminateParams& p) {
  p.validate();
  const double th = p.theta;
  const double den = quad(th * A + (1.0 - th) * B, p.e);
  if (!(den > 1e-14)) throw Error(ErrorKind::DegenerateDenominator, "e^T [theta A + (1-theta) B] e <= 1e-14");
  const Vec2 de = (A - B) * p.e;
  return (1.0 - th) * A + th * B - (th * (1.0 - th) / den) * SymMat2::outer(de);
}

/// det(I + theta B^{-1/2} H B^{-1/2} (A - B)) is bounded below by this value when A, B lie in M[mu0, mu1].
inline double gamma_det_lower_bound(double theta, double mu0, double mu1) {
  const double r = (theta * mu0 + (1.0 - theta) * mu1) / mu1;
  return r * r;
}

namespace detail {

inline Mat2 gamma_inner(const SymMat2& A, const SymMat2& B, const GammaParams& g) {
  const Mat2 bmh = Mat2::from(inv(sqrt_psd(B)));
  return Mat2::identity() + g.theta * (bmh * Mat2::from(g.H) * bmh * Mat2::from(A - B));
}

}  // namespace detail

/// det of the inner matrix I + theta B^{-1/2} H B^{-1/2} (A - B).
inline double gamma_inner_det(const SymMat2& A, const SymMat2& B, const GammaParams& g) {
  return detail::gamma_inner(A, B, g).det();
}

/// B + (1-theta) (A-B) [I + theta B^{-1/2} H B^{-1/2} (A-B)]^{-1}
inline SymMat2 gamma_param(const SymMat2& A, const SymMat2& B, const GammaParams& g) {
  g.validate();
  const Mat2 inner = detail::gamma_inner(A, B, g);
  const auto [a_lo, a_hi] = eig2(A);
  const auto [b_lo, b_hi] = eig2(B);
  const double mu0 = std::min(a_lo, b_lo), mu1 = std::max(a_hi, b_hi);
  if (!(mu0 > 0.0) || !(inner.det() >= 0.5 * gamma_det_lower_bound(g.theta, mu0, mu1))) {
    throw Error(ErrorKind::SingularInner, "inner matrix determinant below half its lower bound");
  }
  return sym(Mat2::from(B) + (1.0 - g.theta) * (Mat2::from(A - B) * inv(inner)));
}

/// The H for which gamma_param reproduces the rank-one laminate with normal e:
/// H = B^{1/2} e e^T B^{1/2} / e^T B e (equal to e e^T when B = I).
inline SymMat2 gamma_h_for_direction(const SymMat2& B, Vec2 e) {
  const Vec2 w = sqrt_psd(B) * e;
  return (1.0 / dot(w, w)) * SymMat2::outer(w);
}

struct BoundMargins {
  /// lambda_min(L - ((1-theta) A^{-1} + theta B^{-1})^{-1})
  double harmonic = 0.0;
  /// lambda_min((1-theta) A + theta B - L)
  double arithmetic = 0.0;
};

inline BoundMargins bounds_check(const SymMat2& A, const SymMat2& B, double theta, const SymMat2& L) {
  const SymMat2 harmonic = inv((1.0 - theta) * inv(A) + theta * inv(B));
  const SymMat2 arithmetic = (1.0 - theta) * A + theta * B;
  return {lambda_min(L - harmonic), lambda_min(arithmetic - L)};
}

/// A where frac(<centroid, e> / eps) lies in [theta, 1), B elsewhere.
inline ElementField<SymMat2> build_layered_field(const Mesh2D& mesh, const SymMat2& A, const SymMat2& B,
                                                 const LaminateParams& p, double eps) {
  p.validate();
  if (!(eps > 0.0)) throw Error(ErrorKind::Validation, "eps must be positive");
  ElementField<SymMat2> f(mesh.num_elements());
  for (std::size_t e = 0; e < f.size(); ++e) {
    const double t = dot(mesh.centroid(e), p.e) / eps;
    const double frac = t - std::floor(t);
    f[e] = (frac >= p.theta && frac < 1.0) ? A : B;
  }
  return f;
}

}  // namespace pev
