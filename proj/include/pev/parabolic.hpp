#pragma once

// Crank-Nicolson integration of M y' = -K y, tracking the M-norm.

#include <cmath>
#include <span>
#include <vector>

#include "pev/error.hpp"
#include "pev/sparse_eigen.hpp"

namespace pev {

struct DecayTrace {
  std::vector<double> times;
  /// ||y(t)||_M
  std::vector<double> norms;
  double lambda_ref = 0.0;
};

/// (M + dt/2 K) y^{n+1} = (M - dt/2 K) y^n from t = 0 to t_end.
inline DecayTrace simulate_decay(const SparseSym& K, const SparseSym& M, std::span<const double> y0, double dt,
                                 double t_end, double lambda_ref = 0.0, double cg_tol = 1e-13) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Validation, "dt must be positive");
  if (!(t_end >= 0.0)) throw Error(ErrorKind::Validation, "t_end must be non-negative");
  if (y0.size() != K.n) throw Error(ErrorKind::FieldSizeMismatch, "y0 length != dof count");

  const SparseSym lhs = SparseSym::combine(1.0, M, 0.5 * dt, K);
  const SparseSym rhs_op = SparseSym::combine(1.0, M, -0.5 * dt, K);

  DecayTrace tr;
  tr.lambda_ref = lambda_ref;
  Vector y(y0.begin(), y0.end());
  tr.times.push_back(0.0);
  tr.norms.push_back(std::sqrt(M.bilinear(y, y)));

  const auto steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
  for (long n = 1; n <= steps; ++n) {
    const Vector rhs = rhs_op * y;
    y = cg_solve_detailed(lhs, rhs, cg_tol, y).x;
    tr.times.push_back(static_cast<double>(n) * dt);
    tr.norms.push_back(std::sqrt(M.bilinear(y, y)));
  }
  return tr;
}

/// Least-squares slope of log ||y|| over the last `fraction` of the trace.
inline double tail_decay_rate(const DecayTrace& tr, double fraction = 0.25) {
  const std::size_t n = tr.times.size();
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * (1.0 - fraction)));
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  double m = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double t = tr.times[i], l = std::log(tr.norms[i]);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    m += 1.0;
  }
  return (m * stl - st * sl) / (m * stt - st * st);
}

}  // namespace pev
