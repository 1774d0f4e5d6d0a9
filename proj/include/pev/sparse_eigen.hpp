#pragma once

// Jacobi-preconditioned CG and inverse power iteration for the smallest
// generalized eigenpairs of an SPD pencil (K, M).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pev/error.hpp"
#include "pev/mesh_fem.hpp"
#include "pev/random.hpp"

namespace pev {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline void scale(double c, std::span<double> x) {
  for (auto& v : x) v *= c;
}

struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves K x = b to ||Kx - b|| <= tol ||b||. `x0` is an optional initial guess.
inline CgResult cg_solve_detailed(const SparseSym& K, std::span<const double> b, double tol,
                                  std::span<const double> x0 = {}, int max_iter = -1) {
  const std::size_t n = K.n;
  if (b.size() != n || (!x0.empty() && x0.size() != n)) {
    throw Error(ErrorKind::FieldSizeMismatch, "cg_solve: vector length != matrix dimension");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::Validation, "cg_solve: tol must be positive");
  if (max_iter < 0) max_iter = static_cast<int>(10 * n);

  CgResult out;
  out.x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    out.x.assign(n, 0.0);
    return out;
  }

  Vector inv_diag = K.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw Error(ErrorKind::NoConvergence, "cg_solve: non-positive diagonal");
    d = 1.0 / d;
  }

  Vector r(n), z(n), p(n), q(n);
  int it = 0;
  // Outer loop restarts from the true residual if the recursive one drifted.
  for (int restart = 0; restart < 4; ++restart) {
    K.multiply(out.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double rnorm = norm(r);
    if (rnorm <= tol * bnorm) {
      out.iterations = it;
      out.relative_residual = rnorm / bnorm;
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (it < max_iter) {
      ++it;
      K.multiply(p, q);
      const double alpha = rz / dot(p, q);
      axpy(alpha, p, out.x);
      axpy(-alpha, q, r);
      rnorm = norm(r);
      if (rnorm <= tol * bnorm) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (it >= max_iter) break;
  }
  K.multiply(out.x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  out.iterations = it;
  out.relative_residual = norm(r) / bnorm;
  if (out.relative_residual <= tol) return out;
  throw Error(ErrorKind::NoConvergence, "cg_solve: relative residual " +
                                            std::to_string(out.relative_residual) + " after " +
                                            std::to_string(it) + " iterations");
}

inline Vector cg_solve(const SparseSym& K, std::span<const double> b, double tol) {
  return cg_solve_detailed(K, b, tol).x;
}

struct EigenOptions {
  /// Relative change of lambda between iterations.
  double lambda_tol = 1e-10;
  /// ||K y - lambda M y|| / ||M y||
  double residual_tol = 1e-8;
  double cg_tol = 1e-11;
  int max_iter = 2000;
};

struct EigenPair {
  double lambda = 0.0;
  /// Interior-dof vector with y^T M y = 1 and sum(y) > 0.
  Vector y;
  double residual = 0.0;
  int iterations = 0;
  /// Set when some interior entry is negative after sign normalization.
  bool positivity_warning = false;
};

struct SpectralReport {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

namespace detail {

inline double m_normalize(const SparseSym& M, Vector& y) {
  const double nrm = std::sqrt(M.bilinear(y, y));
  scale(1.0 / nrm, y);
  return nrm;
}

inline double eig_residual(const SparseSym& K, const SparseSym& M, std::span<const double> y,
                           double lambda) {
  Vector ky = K * y;
  const Vector my = M * y;
  axpy(-lambda, my, ky);
  return norm(ky) / norm(my);
}

/// Removes the M-component along `unit` (assumed M-normalized).
inline void m_deflate(const SparseSym& M, std::span<const double> unit, Vector& y) {
  const double c = M.bilinear(y, unit);
  axpy(-c, unit, y);
}

/// Inverse iteration from `y` (optionally kept M-orthogonal to `deflate`).
inline EigenPair inverse_iteration(const SparseSym& K, const SparseSym& M, Vector y,
                                   const EigenOptions& opt, std::span<const double> deflate) {
  if (K.n != M.n || y.size() != K.n) {
    throw Error(ErrorKind::FieldSizeMismatch, "inverse_iteration: dimension mismatch");
  }
  if (!deflate.empty()) m_deflate(M, deflate, y);
  m_normalize(M, y);

  EigenPair out;
  double lambda = K.bilinear(y, y);
  Vector guess(K.n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Vector rhs = M * y;
    // K^{-1} M y ~ y / lambda near convergence.
    for (std::size_t i = 0; i < K.n; ++i) guess[i] = y[i] / lambda;
    Vector z = cg_solve_detailed(K, rhs, opt.cg_tol, guess).x;
    if (!deflate.empty()) m_deflate(M, deflate, z);
    m_normalize(M, z);
    y = std::move(z);
    const double next = K.bilinear(y, y);
    const double res = eig_residual(K, M, y, next);
    const bool settled = std::abs(next - lambda) <= opt.lambda_tol * std::abs(next);
    lambda = next;
    if (settled && res <= opt.residual_tol) {
      out.lambda = lambda;
      out.y = std::move(y);
      out.residual = res;
      out.iterations = it;
      return out;
    }
  }
  throw Error(ErrorKind::NoConvergence,
              "inverse iteration did not converge in " + std::to_string(opt.max_iter) + " steps");
}

}  // namespace detail

/// Smallest generalized eigenpair of (K, M) by inverse power iteration.
inline EigenPair principal_pair(const SparseSym& K, const SparseSym& M, const EigenOptions& opt = {}) {
  EigenPair p = detail::inverse_iteration(K, M, Vector(K.n, 1.0), opt, {});
  double s = 0.0;
  for (double v : p.y) s += v;
  if (s < 0.0) scale(-1.0, p.y);
  for (double v : p.y) {
    if (v < 0.0) {
      p.positivity_warning = true;
      break;
    }
  }
  return p;
}

inline EigenPair principal_pair(const SparseSym& K, const SparseSym& M, double tol) {
  EigenOptions opt;
  opt.lambda_tol = tol;
  return principal_pair(K, M, opt);
}

namespace detail {

/// Cyclic Jacobi for a small dense symmetric matrix (row-major, n x n).
/// Returns eigenvalues ascending and the matching eigenvectors as columns of `vecs`.
inline std::vector<double> small_sym_eig(std::vector<double> a, std::size_t n, std::vector<double>& vecs) {
  vecs.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = 0.5 * (a[q * n + q] - a[p * n + p]) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs[k * n + p], vkq = vecs[k * n + q];
          vecs[k * n + p] = c * vkp - s * vkq;
          vecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });
  std::vector<double> vals(n), sorted(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    vals[c] = a[order[c] * n + order[c]];
    for (std::size_t k = 0; k < n; ++k) sorted[k * n + c] = vecs[k * n + order[c]];
  }
  vecs = std::move(sorted);
  return vals;
}

/// Modified Gram-Schmidt in the M inner product (two passes).
inline void m_orthonormalize(const SparseSym& M, std::vector<Vector>& block) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) m_deflate(M, block[j], block[i]);
      m_normalize(M, block[i]);
    }
  }
}

}  // namespace detail

/// Second eigenvalue by block inverse iteration kept M-orthogonal to pair1.y, with a
/// Rayleigh-Ritz step on the block so that a (near-)degenerate lambda2 = lambda3 does not stall.
inline SpectralReport second_eigenvalue(const SparseSym& K, const SparseSym& M, const EigenPair& pair1,
                                        const EigenOptions& opt = {}, std::size_t block_size = 3) {
  if (K.n != M.n || pair1.y.size() != K.n) {
    throw Error(ErrorKind::FieldSizeMismatch, "second_eigenvalue: dimension mismatch");
  }
  const std::size_t nb = std::min<std::size_t>(block_size, K.n > 1 ? K.n - 1 : 1);
  Uniform rng(0x5eed2u);
  std::vector<Vector> block(nb, Vector(K.n));
  for (auto& v : block) {
    for (auto& x : v) x = rng(-1.0, 1.0);
    detail::m_deflate(M, pair1.y, v);
  }
  detail::m_orthonormalize(M, block);

  std::vector<double> ritz(nb, 0.0);
  double prev = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < nb; ++i) {
      Vector guess = block[i];
      const double r = ritz[i] > 0.0 ? ritz[i] : K.bilinear(block[i], block[i]);
      scale(1.0 / r, guess);
      block[i] = cg_solve_detailed(K, M * block[i], opt.cg_tol, guess).x;
      detail::m_deflate(M, pair1.y, block[i]);
    }
    detail::m_orthonormalize(M, block);

    std::vector<Vector> kb(nb);
    for (std::size_t i = 0; i < nb; ++i) kb[i] = K * block[i];
    std::vector<double> h(nb * nb), vecs;
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < nb; ++j) h[i * nb + j] = 0.5 * (dot(block[i], kb[j]) + dot(block[j], kb[i]));
    ritz = detail::small_sym_eig(h, nb, vecs);

    std::vector<Vector> rotated(nb, Vector(K.n, 0.0));
    for (std::size_t c = 0; c < nb; ++c)
      for (std::size_t k = 0; k < nb; ++k) axpy(vecs[k * nb + c], block[k], rotated[c]);
    block = std::move(rotated);

    const double lambda2 = ritz[0];
    const double res = detail::eig_residual(K, M, block[0], lambda2);
    const bool settled = it > 1 && std::abs(lambda2 - prev) <= opt.lambda_tol * std::abs(lambda2);
    prev = lambda2;
    if (settled && res <= opt.residual_tol) {
      SpectralReport rep;
      rep.lambda1 = pair1.lambda;
      rep.lambda2 = lambda2;
      rep.gap = lambda2 - pair1.lambda;
      rep.iterations = it;
      return rep;
    }
  }
  throw Error(ErrorKind::NoConvergence,
              "second_eigenvalue did not converge in " + std::to_string(opt.max_iter) + " steps");
}

/// Principal pair of -div(a grad .) with homogeneous Dirichlet data on `mesh`.
inline EigenPair solve_principal(const Mesh2D& mesh, const ElementField<SymMat2>& a,
                                 const EigenOptions& opt = {}) {
  return principal_pair(assemble_stiffness(mesh, a), assemble_mass(mesh), opt);
}

}  // namespace pev
