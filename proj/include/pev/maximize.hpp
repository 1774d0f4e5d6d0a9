#pragma once

// Projected gradient ascent of the principal eigenvalue over densities
// sigma in Sigma[alpha, beta], and the first-order condition checks for a
// computed maximizer.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pev/controls.hpp"
#include "pev/sparse_eigen.hpp"

namespace pev {

/// d/dt lambda(abar + t (a - abar)) at t = 0: sum_e area_e <(a_e - abar_e) grad y, grad y>.
inline double directional_derivative(const Mesh2D& mesh, const ElementField<SymMat2>& abar,
                                     const ElementField<SymMat2>& a, const EigenPair& pair) {
  check_field_size(mesh, abar, "directional_derivative");
  check_field_size(mesh, a, "directional_derivative");
  const auto grad = element_gradients(mesh, mesh.extend(pair.y));
  double s = 0.0;
  for (std::size_t e = 0; e < grad.size(); ++e) s += mesh.element_area[e] * quad(a[e] - abar[e], grad[e]);
  return s;
}

/// g_e = <(A1 - A0) grad y, grad y>, the L2 gradient of lambda with respect to sigma.
inline ElementField<double> density_gradient(const Mesh2D& mesh, const ControlBounds& b, const EigenPair& pair) {
  const auto grad = element_gradients(mesh, mesh.extend(pair.y));
  const SymMat2 d = b.A1 - b.A0;
  ElementField<double> g(grad.size());
  for (std::size_t e = 0; e < grad.size(); ++e) g[e] = quad(d, grad[e]);
  return g;
}

enum class VolumeCase { Pinned, AtAlpha, AtBeta, Interior };

inline const char* to_string(VolumeCase c) {
  switch (c) {
    case VolumeCase::Pinned: return "pinned";
    case VolumeCase::AtAlpha: return "at_alpha";
    case VolumeCase::AtBeta: return "at_beta";
    case VolumeCase::Interior: return "interior";
  }
  return "unknown";
}

struct KktRecord {
  /// Area-weighted mean of g over the intermediate set.
  double intermediate_constant = 0.0;
  /// Area-weighted std / |mean| of g over the intermediate set; NaN when the set is empty.
  double cv_intermediate = std::numeric_limits<double>::quiet_NaN();
  /// max(0, sup g|{sigma=0} - inf g|{0<sigma<1}, ...) over the ordered sets.
  double ordering_violation = 0.0;
  double g_range = 0.0;
  double relative_ordering_violation = 0.0;
  double volume = 0.0;
  VolumeCase volume_case = VolumeCase::Interior;
  /// Largest violation of the sign conditions that apply in the current volume case.
  double sign_residual = 0.0;
  double classify_tol = 1e-3;
  std::size_t count_zero = 0, count_intermediate = 0, count_one = 0;
  bool empty_intermediate = true;
};

inline KktRecord kkt_check(const Mesh2D& mesh, const DensityField& sigma, const EigenPair& pair,
                           const ControlBounds& b, double classify_tol = 1e-3) {
  check_field_size(mesh, sigma.sigma, "kkt_check");
  const auto g = density_gradient(mesh, b, pair);
  constexpr double inf = std::numeric_limits<double>::infinity();

  KktRecord k;
  k.classify_tol = classify_tol;
  k.volume = volume(mesh, sigma);

  double max0 = -inf, minmid = inf, maxmid = -inf, min1 = inf;
  double gmin = inf, gmax = -inf;
  double wsum = 0.0, wg = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) {
    gmin = std::min(gmin, g[e]);
    gmax = std::max(gmax, g[e]);
    if (sigma[e] <= classify_tol) {
      ++k.count_zero;
      max0 = std::max(max0, g[e]);
    } else if (sigma[e] >= 1.0 - classify_tol) {
      ++k.count_one;
      min1 = std::min(min1, g[e]);
    } else {
      ++k.count_intermediate;
      minmid = std::min(minmid, g[e]);
      maxmid = std::max(maxmid, g[e]);
      wsum += mesh.element_area[e];
      wg += mesh.element_area[e] * g[e];
    }
  }
  k.g_range = g.empty() ? 0.0 : gmax - gmin;
  k.empty_intermediate = k.count_intermediate == 0;
  if (!k.empty_intermediate) {
    const double mean = wg / wsum;
    double var = 0.0;
    for (std::size_t e = 0; e < g.size(); ++e) {
      if (sigma[e] > classify_tol && sigma[e] < 1.0 - classify_tol) {
        var += mesh.element_area[e] * (g[e] - mean) * (g[e] - mean);
      }
    }
    k.intermediate_constant = mean;
    k.cv_intermediate = std::sqrt(var / wsum) / std::abs(mean);
  }

  double viol = 0.0;
  if (k.count_zero && k.count_intermediate) viol = std::max(viol, max0 - minmid);
  if (k.count_intermediate && k.count_one) viol = std::max(viol, maxmid - min1);
  if (k.count_zero && k.count_one) viol = std::max(viol, max0 - min1);
  k.ordering_violation = viol;
  k.relative_ordering_violation = k.g_range > 0.0 ? viol / k.g_range : 0.0;

  const double omega = mesh.domain_area();
  const double vtol = 1e-9 * omega;
  const bool below_beta = k.volume < b.beta * omega - vtol;
  const bool above_alpha = k.volume > b.alpha * omega + vtol;
  if (b.alpha == b.beta) k.volume_case = VolumeCase::Pinned;
  else if (below_beta && above_alpha) k.volume_case = VolumeCase::Interior;
  else if (below_beta) k.volume_case = VolumeCase::AtAlpha;
  else k.volume_case = VolumeCase::AtBeta;

  double res = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) {
    // vol < beta|Omega|: g <= 0 wherever sigma < 1.
    if (below_beta && sigma[e] < 1.0 - classify_tol) res = std::max(res, g[e]);
    // vol > alpha|Omega|: g >= 0 wherever sigma > 0.
    if (above_alpha && sigma[e] > classify_tol) res = std::max(res, -g[e]);
  }
  k.sign_residual = res;
  return k;
}

struct AscentOptions {
  /// Initial trial step; <= 0 selects 0.1 / max_e |g_e| from the first gradient.
  double step0 = 0.0;
  int max_iter = 5000;
  /// Relative lambda increase treated as stagnation.
  double tol = 1e-8;
  int stall_steps = 3;
  int max_backtrack = 30;
  double classify_tol = 1e-3;
  EigenOptions eig;
};

struct OptimReport {
  std::vector<double> lambda_history;
  DensityField sigma_final;
  EigenPair pair;
  KktRecord kkt;
  int iterations = 0;
  double step0 = 0.0;
  bool converged = false;
};

inline OptimReport ascend(const ControlBounds& b, const Mesh2D& mesh, const DensityField& sigma0,
                          const AscentOptions& opt = {}) {
  check_field_size(mesh, sigma0.sigma, "ascend");
  if (!is_feasible(mesh, sigma0, b)) throw Error(ErrorKind::Validation, "ascend: sigma0 is not feasible");

  const SparseSym M = assemble_mass(mesh);
  const auto solve = [&](const DensityField& s) {
    return principal_pair(assemble_stiffness(mesh, coefficient_from_density(s, b)), M, opt.eig);
  };

  OptimReport rep;
  rep.sigma_final = sigma0;
  rep.pair = solve(sigma0);
  rep.lambda_history.push_back(rep.pair.lambda);

  int stall = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto g = density_gradient(mesh, b, rep.pair);
    if (it == 0) {
      double gmax = 0.0;
      for (double v : g) gmax = std::max(gmax, std::abs(v));
      rep.step0 = opt.step0 > 0.0 ? opt.step0 : (gmax > 0.0 ? 0.1 / gmax : 0.0);
    }
    if (rep.step0 == 0.0) {
      rep.converged = true;
      break;
    }

    bool accepted = false, stationary = false;
    double t = rep.step0;
    for (int k = 0; k <= opt.max_backtrack; ++k, t *= 0.5) {
      ElementField<double> raw = rep.sigma_final.sigma;
      axpy(t, g, raw);
      DensityField cand = project_density(mesh, raw, b);
      if (cand == rep.sigma_final) {
        stationary = true;
        break;
      }
      EigenPair p = solve(cand);
      if (p.lambda >= rep.pair.lambda) {
        const double gain = (p.lambda - rep.pair.lambda) / rep.pair.lambda;
        rep.sigma_final = std::move(cand);
        rep.pair = std::move(p);
        rep.lambda_history.push_back(rep.pair.lambda);
        stall = gain <= opt.tol ? stall + 1 : 0;
        accepted = true;
        break;
      }
    }
    rep.iterations = it + 1;
    if (stationary) {
      rep.converged = true;
      break;
    }
    if (!accepted) {
      if (it == 0) throw Error(ErrorKind::NoProgress, "backtracking exhausted at the first iteration");
      rep.converged = true;
      break;
    }
    if (stall >= opt.stall_steps) {
      rep.converged = true;
      break;
    }
  }
  rep.kkt = kkt_check(mesh, rep.sigma_final, rep.pair, b, opt.classify_tol);
  return rep;
}

/// max over the sample set of sum_e (sigma'_e - sigma_e) area_e g_e; <= 0 at a maximizer.
inline double variational_residual(const Mesh2D& mesh, const ElementField<double>& g, const DensityField& sigma,
                                   const std::vector<DensityField>& others) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : others) {
    double v = 0.0;
    for (std::size_t e = 0; e < g.size(); ++e) v += (s[e] - sigma[e]) * mesh.element_area[e] * g[e];
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace pev
