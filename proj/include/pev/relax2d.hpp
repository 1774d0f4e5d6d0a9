#pragma once

// Closed-form relaxed minimizer for two phases A0 = diag(mu0, mu1), A1 = I
// with 0 < mu0 < 1 < mu1 and no volume constraint.
//
// Gradient space splits into four cones. On E_A0 the pure phase A0 is
// pointwise optimal, on E_I the pure phase I; on E+ and E- neither is, and the
// optimal laminate maps xi onto the line spanned by (eps sqrt(1-s), sqrt(s)).
// F(xi) = Abar(xi) xi is the resulting effective flux, and the relaxed
// principal eigenvalue minimizes <F(grad y), grad y> / |y|^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pev/controls.hpp"
#include "pev/dense_sym.hpp"
#include "pev/error.hpp"
#include "pev/lamination.hpp"
#include "pev/mesh_fem.hpp"
#include "pev/random.hpp"
#include "pev/sparse_eigen.hpp"

namespace pev {

enum class Region { Zero = 0, EA0 = 1, EI = 2, EPlus = 3, EMinus = 4 };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Zero: return "Zero";
    case Region::EA0: return "EA0";
    case Region::EI: return "EI";
    case Region::EPlus: return "EPlus";
    case Region::EMinus: return "EMinus";
  }
  return "?";
}

/// Phase bounds 0 < mu0 < 1 < mu1; A0 = diag(mu0, mu1), A1 = I.
struct NormalForm {
  double mu0 = 0.5;
  double mu1 = 1.5;

  NormalForm() = default;
  NormalForm(double m0, double m1) : mu0(m0), mu1(m1) {
    if (!(mu0 > 0.0 && mu0 < 1.0 && mu1 > 1.0 && std::isfinite(mu1))) {
      throw Error(ErrorKind::InvalidBounds, "normal form requires 0 < mu0 < 1 < mu1");
    }
  }

  SymMat2 A0() const { return SymMat2::diag(mu0, mu1); }
  /// xi2^2 <= r_lo xi1^2 is E_A0.
  double r_lo() const { return mu0 * (1.0 - mu0) / (mu1 * (mu1 - 1.0)); }
  /// xi2^2 >= r_hi xi1^2 is E_I.
  double r_hi() const { return mu1 * (1.0 - mu0) / (mu0 * (mu1 - 1.0)); }
  /// s = (1 - mu0) mu1 / (mu1 - mu0), in (0,1).
  double s() const { return (1.0 - mu0) * mu1 / (mu1 - mu0); }

  /// G+ (sign = +1) or G- (sign = -1).
  SymMat2 G(double sign) const {
    const double sv = s();
    return {1.0 - sv, sign * std::sqrt(sv * (1.0 - sv)), sv};
  }
};

inline Region classify(Vec2 xi, const NormalForm& nf) {
  if (xi.x1 == 0.0 && xi.x2 == 0.0) return Region::Zero;
  const double q1 = xi.x1 * xi.x1, q2 = xi.x2 * xi.x2;
  if (q2 <= nf.r_lo() * q1) return Region::EA0;
  if (q2 >= nf.r_hi() * q1) return Region::EI;
  return xi.x1 * xi.x2 > 0.0 ? Region::EPlus : Region::EMinus;
}

inline Region classify(Vec2 xi, double mu0, double mu1) { return classify(xi, NormalForm(mu0, mu1)); }

/// F(xi) = Abar(xi) xi.
inline Vec2 effective_F(Vec2 xi, const NormalForm& nf) {
  switch (classify(xi, nf)) {
    case Region::Zero: return {0.0, 0.0};
    case Region::EA0: return nf.A0() * xi;
    case Region::EI: return xi;
    case Region::EPlus: return nf.G(1.0) * xi;
    case Region::EMinus: return nf.G(-1.0) * xi;
  }
  return {0.0, 0.0};
}

inline Vec2 effective_F(Vec2 xi, double mu0, double mu1) { return effective_F(xi, NormalForm(mu0, mu1)); }

/// Laminate data for xi in E+ or E-.
struct LamClosedForm {
  double s = 0.0;
  /// Local volume fraction of the I phase.
  double gamma = 0.0;
  double epsilon_sign = 1.0;
  SymMat2 G;
  SymMat2 Abar;
  /// Abar xi = C_xi (eps sqrt(1-s), sqrt(s))
  double C_xi = 0.0;
};

/// gamma(xi) from the second component of xi = ((1-gamma) A0^{-1} + gamma I) eta.
inline double laminate_fraction(Vec2 xi, const NormalForm& nf) {
  const double a1 = std::abs(xi.x1), a2 = std::abs(xi.x2);
  const double m0 = nf.mu0, m1 = nf.mu1;
  const double num = a2 * std::sqrt(m1 / (1.0 - m0)) - a1 * std::sqrt(m0 / (m1 - 1.0));
  const double den = a1 * std::sqrt(m0 * (m1 - 1.0)) + a2 * std::sqrt(m1 * (1.0 - m0));
  return num / den;
}

struct AbarResult {
  SymMat2 A;
  std::optional<LamClosedForm> lam;
};

inline AbarResult abar(Vec2 xi, const NormalForm& nf) {
  const Region r = classify(xi, nf);
  if (r == Region::Zero || r == Region::EI) return {SymMat2::identity(), std::nullopt};
  if (r == Region::EA0) return {nf.A0(), std::nullopt};

  LamClosedForm lc;
  lc.s = nf.s();
  lc.epsilon_sign = r == Region::EPlus ? 1.0 : -1.0;
  lc.gamma = laminate_fraction(xi, nf);
  lc.G = nf.G(lc.epsilon_sign);
  lc.C_xi = lc.epsilon_sign * xi.x1 * std::sqrt(1.0 - lc.s) + xi.x2 * std::sqrt(lc.s);
  const SymMat2 Q = inv(nf.A0() - SymMat2::identity()) + lc.gamma * (SymMat2::identity() - lc.G);
  SymMat2 Qinv;
  try {
    Qinv = inv(Q);
  } catch (const Error&) {
    throw Error(ErrorKind::SingularQ, "Q = (A0 - I)^{-1} + gamma (I - G) is singular");
  }
  lc.Abar = SymMat2::identity() + (1.0 - lc.gamma) * Qinv;
  return {lc.Abar, lc};
}

inline AbarResult abar(Vec2 xi, double mu0, double mu1) { return abar(xi, NormalForm(mu0, mu1)); }

/// Pointwise local density of the I phase implied by the region of xi.
inline double density_proxy(Vec2 xi, const NormalForm& nf) {
  switch (classify(xi, nf)) {
    case Region::EA0: return 0.0;
    case Region::Zero:
    case Region::EI: return 1.0;
    case Region::EPlus:
    case Region::EMinus: return laminate_fraction(xi, nf);
  }
  return 1.0;
}

/// Relaxed Rayleigh functional sum_e area_e <F(grad y), grad y> / |y|_M^2 for interior-dof y.
inline double relaxed_functional(const Mesh2D& mesh, const SparseSym& M, std::span<const double> y,
                                 const NormalForm& nf) {
  const auto grad = element_gradients(mesh, mesh.extend(y));
  double num = 0.0;
  for (std::size_t e = 0; e < grad.size(); ++e) num += mesh.element_area[e] * dot(effective_F(grad[e], nf), grad[e]);
  return num / M.bilinear(y, y);
}

struct MinOptions {
  /// Stop when |lambda_k - lambda_{k-1}| <= tol * lambda_k.
  double tol = 1e-10;
  int max_outer = 200;
  EigenOptions eig{1e-12, 1e-9, 1e-11, 4000};
};

struct MinReport {
  double lambda = 0.0;
  /// Interior-dof principal eigenfunction of the last solved field (M-normalized).
  Vector y;
  /// a_e = Abar(grad y|_e): the pointwise relaxed coefficient of the final state.
  ElementField<SymMat2> a_field;
  /// ||K(a_field) y - lambda M y|| / ||M y||; vanishes at an exact fixed point.
  double state_residual = 0.0;
  /// grad y per element (generates a_field), and its regions.
  ElementField<Vec2> generating_gradient;
  ElementField<Region> regions;
  std::array<std::size_t, 5> region_counts{};
  std::vector<double> fixed_point_history;
  std::vector<double> functional_history;
  /// Per-outer-step count of elements where <Abar(xi) xi, xi> > <a_k xi, xi> (pointwise descent failures).
  std::vector<std::size_t> descent_failures;
  double pointwise_violation_fraction = 0.0;
  ElementField<double> h_field;
  int outer_iterations = 0;
  bool converged = false;
};

inline NormalForm normal_form_of(const ControlBounds& b) {
  const NormalForm nf(b.mu0, b.mu1);
  const auto close = [](const SymMat2& x, const SymMat2& y) { return frob(x - y) <= 1e-14 * (1.0 + frob(y)); };
  if (!close(b.A0, nf.A0()) || !close(b.A1, SymMat2::identity())) {
    throw Error(ErrorKind::InvalidBounds, "relaxed minimization requires A0 = diag(mu0, mu1) and A1 = I");
  }
  if (b.alpha != 0.0 || b.beta != 1.0) {
    throw Error(ErrorKind::InvalidBounds, "relaxed minimization requires (alpha, beta) = (0, 1)");
  }
  return nf;
}

/// Alternating fixed point: principal pair of a_k, then a_{k+1} = Abar(grad y_k) elementwise.
/// A non-converged run is reported with converged = false and full histories.
inline MinReport solve_relaxed_min(const ControlBounds& b, const Mesh2D& mesh, const MinOptions& opt = {}) {
  const NormalForm nf = normal_form_of(b);
  const SparseSym M = assemble_mass(mesh);

  MinReport rep;
  ElementField<SymMat2> a = constant_field(mesh, SymMat2::identity());

  for (int k = 0; k < opt.max_outer; ++k) {
    EigenPair pair = principal_pair(assemble_stiffness(mesh, a), M, opt.eig);
    const auto grad = element_gradients(mesh, mesh.extend(pair.y));
    rep.fixed_point_history.push_back(pair.lambda);
    rep.functional_history.push_back(relaxed_functional(mesh, M, pair.y, nf));

    ElementField<SymMat2> next(grad.size());
    std::size_t failures = 0;
    for (std::size_t e = 0; e < grad.size(); ++e) {
      next[e] = abar(grad[e], nf).A;
      const double scale = dot(grad[e], grad[e]);
      if (quad(next[e], grad[e]) > quad(a[e], grad[e]) + 1e-12 * scale) ++failures;
    }
    rep.descent_failures.push_back(failures);
    rep.outer_iterations = k + 1;
    rep.lambda = pair.lambda;
    rep.y = std::move(pair.y);
    rep.a_field = next;
    rep.generating_gradient = grad;

    const std::size_t n = rep.fixed_point_history.size();
    if (n >= 2 && std::abs(rep.fixed_point_history[n - 1] - rep.fixed_point_history[n - 2]) <= opt.tol * pair.lambda) {
      rep.converged = true;
      break;
    }
    a = std::move(next);
  }
  rep.state_residual = detail::eig_residual(assemble_stiffness(mesh, rep.a_field), M, rep.y, rep.lambda);

  rep.regions.resize(mesh.num_elements());
  rep.region_counts.fill(0);
  for (std::size_t e = 0; e < rep.regions.size(); ++e) {
    rep.regions[e] = classify(rep.generating_gradient[e], nf);
    ++rep.region_counts[static_cast<std::size_t>(rep.regions[e])];
  }
  return rep;
}

struct PointwiseViolations {
  /// <a xi, xi> >= <A_i^{-1} a xi, a xi>, i = 0, 1.
  double in_A0 = 0.0;
  double in_A1 = 0.0;
  /// Equalities <a^{-1} eta, eta> = <A0^{-1} eta, eta> = <eta, eta> on E+/E- elements.
  double equality_on_laminates = 0.0;
  /// <a xi, xi> >= <B^{-1} a xi, a xi> for sampled laminates B of A0 with base I.
  double against_laminates = 0.0;
  std::size_t laminate_samples = 0;
};

/// Area fractions of elements violating each pointwise necessary condition at relative tolerance `tol`.
inline PointwiseViolations verify_pointwise_conditions(const MinReport& rep, const Mesh2D& mesh, const NormalForm& nf,
                                                       double tol, std::size_t samples = 20,
                                                       std::uint64_t seed = 20240501) {
  check_field_size(mesh, rep.a_field, "verify_pointwise_conditions");
  const auto grad = element_gradients(mesh, mesh.extend(rep.y));
  const SymMat2 A0inv = inv(nf.A0());

  Uniform rng(seed);
  std::vector<SymMat2> lam_inv;
  for (std::size_t i = 0; i < samples; ++i) {
    GammaParams gp{rng(), random_trace_one_psd(rng)};
    lam_inv.push_back(inv(gamma_param(nf.A0(), SymMat2::identity(), gp)));
  }

  PointwiseViolations v;
  v.laminate_samples = samples;
  const double omega = mesh.domain_area();
  for (std::size_t e = 0; e < grad.size(); ++e) {
    const Vec2 xi = grad[e];
    const SymMat2& a = rep.a_field[e];
    const Vec2 eta = a * xi;
    const double energy = dot(eta, xi);
    if (!(energy > 0.0)) continue;
    const double w = mesh.element_area[e] / omega;
    const double slack = tol * energy;
    if (energy < quad(A0inv, eta) - slack) v.in_A0 += w;
    if (energy < dot(eta, eta) - slack) v.in_A1 += w;
    if (rep.regions[e] == Region::EPlus || rep.regions[e] == Region::EMinus) {
      const double ee = dot(eta, eta);
      const double via_a = quad(inv(a), eta);
      const double via_a0 = quad(A0inv, eta);
      if (std::abs(via_a - ee) > tol * ee || std::abs(via_a0 - ee) > tol * ee) v.equality_on_laminates += w;
    }
    for (const auto& binv : lam_inv) {
      if (energy < quad(binv, eta) - slack) {
        v.against_laminates += w;
        break;
      }
    }
  }
  return v;
}

struct BangBangReport {
  ElementField<double> h;
  ElementField<double> sigma;
  /// Area-weighted median of h over fractional elements (NaN when there are none).
  double psi_median = 0.0;
  /// Threshold used for the structure check: 0 in the interior-volume case, else psi_median.
  double psi = 0.0;
  bool interior_volume = false;
  /// Multipliers normalized to mu0^2 + Psi^2 = 1 with mu0 <= 0.
  double multiplier_mu0 = -1.0;
  double multiplier_psi = 0.0;
  /// True when the density is pure phase everywhere with a single phase (the mu0 = 0 case).
  bool mu0_zero_candidate = false;
  /// max |h| / |a grad y|^2 over fractional elements.
  double max_relative_h_fractional = 0.0;
  double structure_violation = 0.0;
  std::size_t fractional_count = 0;
};

/// Density proxy derived from the report's generating regions: 0 on E_A0, 1 on E_I, gamma on E+/E-.
inline DensityField density_proxy(const MinReport& rep, const NormalForm& nf) {
  DensityField s{ElementField<double>(rep.generating_gradient.size())};
  for (std::size_t e = 0; e < s.size(); ++e) s[e] = density_proxy(rep.generating_gradient[e], nf);
  return s;
}

/// Switching function h = <(A0^{-1} - A1^{-1}) a grad y, a grad y> and the threshold rule
/// sigma = 1 where h < Psi, sigma = 0 where h > Psi.
inline BangBangReport h_field_and_bangbang(const MinReport& rep, const Mesh2D& mesh, const NormalForm& nf,
                                           const std::optional<DensityField>& sigma_proxy = std::nullopt,
                                           double tol = 1e-6, double classify_tol = 1e-3) {
  check_field_size(mesh, rep.a_field, "h_field_and_bangbang");
  const auto grad = element_gradients(mesh, mesh.extend(rep.y));
  const SymMat2 D = inv(nf.A0()) - SymMat2::identity();

  BangBangReport out;
  out.sigma = sigma_proxy ? sigma_proxy->sigma : density_proxy(rep, nf).sigma;
  check_field_size(mesh, out.sigma, "h_field_and_bangbang");
  out.h.resize(grad.size());
  std::vector<double> eta2(grad.size());
  for (std::size_t e = 0; e < grad.size(); ++e) {
    const Vec2 eta = rep.a_field[e] * grad[e];
    out.h[e] = quad(D, eta);
    eta2[e] = dot(eta, eta);
  }

  std::vector<std::pair<double, double>> frac;  // (h, area)
  double vol = 0.0;
  for (std::size_t e = 0; e < grad.size(); ++e) {
    vol += out.sigma[e] * mesh.element_area[e];
    if (out.sigma[e] > classify_tol && out.sigma[e] < 1.0 - classify_tol) {
      frac.emplace_back(out.h[e], mesh.element_area[e]);
      if (eta2[e] > 0.0) out.max_relative_h_fractional = std::max(out.max_relative_h_fractional, std::abs(out.h[e]) / eta2[e]);
    }
  }
  out.fractional_count = frac.size();
  if (frac.empty()) {
    out.psi_median = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::sort(frac.begin(), frac.end());
    double total = 0.0;
    for (const auto& f : frac) total += f.second;
    double acc = 0.0;
    out.psi_median = frac.back().first;
    for (const auto& f : frac) {
      acc += f.second;
      if (acc >= 0.5 * total) {
        out.psi_median = f.first;
        break;
      }
    }
  }

  const double omega = mesh.domain_area();
  out.interior_volume = vol > 1e-12 * omega && vol < (1.0 - 1e-12) * omega;
  bool all_zero = true, all_one = true;
  for (double s : out.sigma) {
    all_zero = all_zero && s <= classify_tol;
    all_one = all_one && s >= 1.0 - classify_tol;
  }
  out.mu0_zero_candidate = all_zero || all_one;
  out.psi = out.interior_volume ? 0.0 : (std::isnan(out.psi_median) ? 0.0 : out.psi_median);
  const double nrm = std::sqrt(1.0 + out.psi * out.psi);
  out.multiplier_mu0 = -1.0 / nrm;
  out.multiplier_psi = out.psi / nrm;

  double bad = 0.0;
  for (std::size_t e = 0; e < grad.size(); ++e) {
    const double slack = tol * (eta2[e] + std::abs(out.psi));
    const double s = out.sigma[e];
    const bool v1 = s < 1.0 - classify_tol && out.h[e] < out.psi - slack;
    const bool v0 = s > classify_tol && out.h[e] > out.psi + slack;
    if (v1 || v0) bad += mesh.element_area[e];
  }
  out.structure_violation = bad / omega;
  return out;
}

}  // namespace pev
