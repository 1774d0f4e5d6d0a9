#pragma once

// Control classes: densities sigma in [0,1] with a volume window, and the
// matrix fields A0 + sigma (A1 - A0) they generate.

#include <algorithm>
#include <cmath>
#include <string>

#include "pev/dense_sym.hpp"
#include "pev/error.hpp"
#include "pev/mesh_fem.hpp"

namespace pev {

enum class Admissibility {
  /// Require 0 < alpha <= beta < 1, or (alpha, beta) = (0, 1) with A0, A1 not Loewner-comparable.
  Enforce,
  /// Only the basic ordering/range invariants (degenerate windows such as alpha = beta = 1).
  Basic,
};

struct ControlBounds {
  double mu0 = 0.0, mu1 = 0.0;
  double alpha = 0.0, beta = 1.0;
  SymMat2 A0, A1;

  ControlBounds() = default;

  ControlBounds(double mu0_, double mu1_, double alpha_, double beta_, SymMat2 a0, SymMat2 a1,
                Admissibility mode = Admissibility::Enforce)
      : mu0(mu0_), mu1(mu1_), alpha(alpha_), beta(beta_), A0(a0), A1(a1) {
    validate(mode);
  }

  bool comparable() const { return loewner_leq(A0, A1) || loewner_leq(A1, A0); }

  void validate(Admissibility mode = Admissibility::Enforce) const {
    if (!(mu0 > 0.0) || !(mu0 <= mu1) || !std::isfinite(mu1)) {
      throw Error(ErrorKind::Validation, "bounds require 0 < mu0 <= mu1 < inf");
    }
    if (!(alpha >= 0.0) || !(alpha <= beta) || !(beta <= 1.0)) {
      throw Error(ErrorKind::Validation, "volume window requires 0 <= alpha <= beta <= 1");
    }
    if (!in_bounds(A0, mu0, mu1)) throw Error(ErrorKind::Validation, "A0 not in M[mu0, mu1]");
    if (!in_bounds(A1, mu0, mu1)) throw Error(ErrorKind::Validation, "A1 not in M[mu0, mu1]");
    if (mode == Admissibility::Basic) return;
    const bool interior = alpha > 0.0 && beta < 1.0;
    const bool full = alpha == 0.0 && beta == 1.0;
    if (interior) return;
    if (full && !comparable()) return;
    if (full) {
      throw Error(ErrorKind::Validation,
                  "(alpha, beta) = (0, 1) admissibility requires A0 and A1 to be Loewner-incomparable");
    }
    throw Error(ErrorKind::Validation,
                "admissibility requires either 0 < alpha <= beta < 1 or (alpha, beta) = (0, 1)");
  }

  /// A(r) = (1 - r) A0 + r A1
  SymMat2 mix(double r) const { return A0 + r * (A1 - A0); }
};

struct DensityField {
  ElementField<double> sigma;

  std::size_t size() const { return sigma.size(); }
  double operator[](std::size_t e) const { return sigma[e]; }
  double& operator[](std::size_t e) { return sigma[e]; }
  friend bool operator==(const DensityField&, const DensityField&) = default;
};

inline double volume(const Mesh2D& mesh, const ElementField<double>& sigma) {
  check_field_size(mesh, sigma, "volume");
  double v = 0.0;
  for (std::size_t e = 0; e < sigma.size(); ++e) v += sigma[e] * mesh.element_area[e];
  return v;
}

inline double volume(const Mesh2D& mesh, const DensityField& s) { return volume(mesh, s.sigma); }

inline DensityField constant_density(const Mesh2D& mesh, double c) {
  return {ElementField<double>(mesh.num_elements(), c)};
}

inline ElementField<SymMat2> coefficient_from_density(const DensityField& s, const ControlBounds& b) {
  ElementField<SymMat2> a(s.size());
  for (std::size_t e = 0; e < s.size(); ++e) {
    const double r = s[e];
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorKind::OutOfRange, "density value outside [0,1] at element " + std::to_string(e));
    }
    a[e] = b.mix(r);
  }
  return a;
}

inline constexpr double kVolumeRelTol = 1e-12;

namespace detail {

inline double clipped_volume(const Mesh2D& mesh, const ElementField<double>& raw, double tau) {
  double v = 0.0;
  for (std::size_t e = 0; e < raw.size(); ++e) v += std::clamp(raw[e] + tau, 0.0, 1.0) * mesh.element_area[e];
  return v;
}

}  // namespace detail

/// Area-weighted Euclidean projection onto {0 <= sigma <= 1, alpha|Omega| <= vol <= beta|Omega|}.
/// The solution is clip(raw + tau) with a scalar shift tau found by bisection.
inline DensityField project_density(const Mesh2D& mesh, const ElementField<double>& raw,
                                    const ControlBounds& b) {
  check_field_size(mesh, raw, "project_density");
  double rmin = raw.empty() ? 0.0 : raw.front(), rmax = rmin;
  for (double v : raw) {
    if (!std::isfinite(v)) throw Error(ErrorKind::OutOfRange, "project_density: non-finite entry");
    rmin = std::min(rmin, v);
    rmax = std::max(rmax, v);
  }
  const double omega = mesh.domain_area();
  const double vtol = kVolumeRelTol * omega;
  const double vlo = b.alpha * omega, vhi = b.beta * omega;

  DensityField out{raw};
  for (auto& v : out.sigma) v = std::clamp(v, 0.0, 1.0);
  const double vol = volume(mesh, out);
  if (vol >= vlo - vtol && vol <= vhi + vtol) return out;

  const double target = vol > vhi ? vhi : vlo;
  // clip(raw + lo) == 0 and clip(raw + hi) == 1, so the root is bracketed.
  double lo = -rmax, hi = 1.0 - rmin;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (detail::clipped_volume(mesh, raw, mid) < target) lo = mid;
    else hi = mid;
  }
  // Volume is piecewise linear in tau; finish with one exact linear step on the free set.
  double tau = 0.5 * (lo + hi);
  double err = detail::clipped_volume(mesh, raw, tau) - target;
  double free_area = 0.0;
  for (std::size_t e = 0; e < raw.size(); ++e) {
    const double s = raw[e] + tau;
    if (s > 0.0 && s < 1.0) free_area += mesh.element_area[e];
  }
  if (free_area > 0.0) {
    const double t2 = tau - err / free_area;
    const double err2 = detail::clipped_volume(mesh, raw, t2) - target;
    if (std::abs(err2) < std::abs(err)) tau = t2;
  }
  for (std::size_t e = 0; e < raw.size(); ++e) out[e] = std::clamp(raw[e] + tau, 0.0, 1.0);
  return out;
}

inline DensityField project_density(const Mesh2D& mesh, const DensityField& raw, const ControlBounds& b) {
  return project_density(mesh, raw.sigma, b);
}

inline bool is_feasible(const Mesh2D& mesh, const DensityField& s, const ControlBounds& b) {
  for (double v : s.sigma) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  const double omega = mesh.domain_area();
  const double vol = volume(mesh, s);
  return vol >= b.alpha * omega - kVolumeRelTol * omega && vol <= b.beta * omega + kVolumeRelTol * omega;
}

/// max_e ||a_e - b_e||_2
inline double linf_distance(const ElementField<SymMat2>& a, const ElementField<SymMat2>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::FieldSizeMismatch, "linf_distance: length mismatch");
  double d = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) d = std::max(d, norm2(a[e] - b[e]));
  return d;
}

}  // namespace pev
