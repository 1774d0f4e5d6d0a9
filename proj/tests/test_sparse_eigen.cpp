#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pev/mesh_fem.hpp"
#include "pev/random.hpp"
#include "pev/sparse_eigen.hpp"

using namespace pev;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

SparseSym from_dense(const Eigen::MatrixXd& d) {
  SparseSym s;
  s.n = static_cast<std::size_t>(d.rows());
  s.row_ptr.push_back(0);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      s.col.push_back(static_cast<int>(j));
      s.val.push_back(d(i, j));
    }
    s.row_ptr.push_back(s.col.size());
  }
  return s;
}

Eigen::MatrixXd dense(const SparseSym& s) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.n), static_cast<Eigen::Index>(s.n));
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) d(static_cast<Eigen::Index>(i), s.col[k]) = s.val[k];
  return d;
}

ElementField<SymMat2> random_field(const Mesh2D& m, Uniform& u, double lo, double hi) {
  ElementField<SymMat2> a(m.num_elements());
  for (auto& x : a) x = random_sym(u, lo, hi);
  return a;
}

double lambda_of(const Mesh2D& m, const ElementField<SymMat2>& a) { return solve_principal(m, a).lambda; }

}  // namespace

TEST(Cg, IdentityReturnsRhs) {
  const SparseSym I = from_dense(Eigen::MatrixXd::Identity(7, 7));
  const Vector b{1, -2, 3, 0.5, 7, -1, 2};
  const Vector x = cg_solve(I, b, 1e-12);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(x[i], b[i], 1e-14);
}

TEST(Cg, ZeroRhs) {
  const auto m = build_mesh(0, 1, 0, 1, 5, 5);
  const SparseSym K = assemble_stiffness(m, constant_field(m, SymMat2::identity()));
  const Vector x = cg_solve(K, Vector(K.n, 0.0), 1e-12);
  for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(Cg, RandomSpdAgainstDenseSolve) {
  Uniform u(31);
  Eigen::MatrixXd B(50, 50);
  for (Eigen::Index i = 0; i < 50; ++i)
    for (Eigen::Index j = 0; j < 50; ++j) B(i, j) = u(-1.0, 1.0);
  const Eigen::MatrixXd A = B * B.transpose() + 5.0 * Eigen::MatrixXd::Identity(50, 50);
  Eigen::VectorXd b(50);
  for (Eigen::Index i = 0; i < 50; ++i) b(i) = u(-1.0, 1.0);
  const SparseSym K = from_dense(A);
  const Vector bv(b.data(), b.data() + 50);
  const double tol = 1e-10;
  const Vector x = cg_solve(K, bv, tol);
  const Eigen::VectorXd xe = Eigen::Map<const Eigen::VectorXd>(x.data(), 50);
  EXPECT_LE((A * xe - b).norm(), tol * b.norm());
  const Eigen::VectorXd oracle = A.llt().solve(b);
  EXPECT_LE((xe - oracle).norm(), 1e-8 * oracle.norm());
}

TEST(Cg, Deterministic) {
  const auto m = build_mesh(0, 1, 0, 1, 12, 12);
  Uniform u(32);
  const SparseSym K = assemble_stiffness(m, random_field(m, u, 0.5, 2.0));
  Vector b(K.n);
  for (auto& v : b) v = u(-1.0, 1.0);
  EXPECT_EQ(cg_solve(K, b, 1e-11), cg_solve(K, b, 1e-11));
}

TEST(Cg, NoConvergenceWhenCapped) {
  const auto m = build_mesh(0, 1, 0, 1, 16, 16);
  const SparseSym K = assemble_stiffness(m, constant_field(m, SymMat2::identity()));
  Vector b(K.n, 1.0);
  try {
    cg_solve_detailed(K, b, 1e-14, {}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
  }
}

TEST(PrincipalPair, UnitSquareLaplacian) {
  const auto m = build_mesh(0, 1, 0, 1, 64, 64);
  const EigenPair p = solve_principal(m, constant_field(m, SymMat2::identity()));
  EXPECT_NEAR(p.lambda, 2 * kPi2, 0.01 * 2 * kPi2);
  EXPECT_LE(p.residual, 1e-8);
}

TEST(PrincipalPair, AnisotropicCenteredSquare) {
  const auto m = build_mesh(-1, 1, -1, 1, 64, 64);
  const EigenPair p = solve_principal(m, constant_field(m, SymMat2::diag(0.5, 1.5)));
  EXPECT_NEAR(p.lambda, kPi2 / 2, 0.01 * kPi2 / 2);
}

TEST(PrincipalPair, NormalizationSignAndPositivity) {
  const auto m = build_mesh(-1, 1, 0, 1, 20, 12);
  Uniform u(33);
  const SparseSym K = assemble_stiffness(m, random_field(m, u, 0.5, 1.5));
  const SparseSym M = assemble_mass(m);
  const EigenPair p = principal_pair(K, M);
  EXPECT_NEAR(M.bilinear(p.y, p.y), 1.0, 1e-12);
  double s = 0.0;
  for (double v : p.y) s += v;
  EXPECT_GT(s, 0.0);
  EXPECT_FALSE(p.positivity_warning);
  for (double v : p.y) EXPECT_GT(v, 0.0);
}

TEST(PrincipalPair, MatchesDenseGeneralizedEigensolver) {
  const auto m = build_mesh(0, 2, 0, 1, 14, 9);
  Uniform u(34);
  const SparseSym K = assemble_stiffness(m, random_field(m, u, 0.3, 3.0));
  const SparseSym M = assemble_mass(m);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(K), dense(M));
  const EigenPair p = principal_pair(K, M);
  EXPECT_NEAR(p.lambda, es.eigenvalues()(0), 1e-9 * es.eigenvalues()(0));
  const SpectralReport s = second_eigenvalue(K, M, p);
  EXPECT_NEAR(s.lambda2, es.eigenvalues()(1), 1e-8 * es.eigenvalues()(1));
  EXPECT_GT(s.gap, 0.0);
}

TEST(PrincipalPair, ScalingIsExact) {
  const auto m = build_mesh(0, 1, 0, 1, 24, 24);
  const double l1 = lambda_of(m, constant_field(m, SymMat2::identity()));
  const double l2 = lambda_of(m, constant_field(m, SymMat2::scalar(2.0)));
  EXPECT_NEAR(l2, 2.0 * l1, 1e-10 * l2);
}

TEST(SecondEigenvalue, UnitSquare) {
  const auto m = build_mesh(0, 1, 0, 1, 48, 48);
  const SparseSym K = assemble_stiffness(m, constant_field(m, SymMat2::identity()));
  const SparseSym M = assemble_mass(m);
  const SpectralReport s = second_eigenvalue(K, M, principal_pair(K, M));
  EXPECT_NEAR(s.lambda2, 5 * kPi2, 0.02 * 5 * kPi2);
  EXPECT_GT(s.gap, 0.0);
  EXPECT_GE(s.lambda2, s.lambda1);
}

TEST(SecondEigenvalue, CenteredSquareRatio) {
  const auto m = build_mesh(-1, 1, -1, 1, 48, 48);
  const SparseSym K = assemble_stiffness(m, constant_field(m, SymMat2::identity()));
  const SparseSym M = assemble_mass(m);
  const SpectralReport s = second_eigenvalue(K, M, principal_pair(K, M));
  EXPECT_NEAR(s.lambda2 / s.lambda1, 2.5, 0.02 * 2.5);
}

TEST(SecondEigenvalue, GapPositiveForRandomFields) {
  Uniform u(35);
  const auto m = build_mesh(0, 1, 0, 1, 16, 16);
  const SparseSym M = assemble_mass(m);
  for (int t = 0; t < 5; ++t) {
    const SparseSym K = assemble_stiffness(m, random_field(m, u, 0.2, 5.0));
    EXPECT_GT(second_eigenvalue(K, M, principal_pair(K, M)).gap, 0.0);
  }
}

TEST(Properties, SharpPoincare) {
  const auto m = build_mesh(0, 1, 0, 1, 16, 16);
  Uniform u(36);
  const SparseSym K = assemble_stiffness(m, random_field(m, u, 0.5, 1.5));
  const SparseSym M = assemble_mass(m);
  const double lam = principal_pair(K, M).lambda;
  for (int t = 0; t < 100; ++t) {
    Vector v(K.n);
    for (auto& x : v) x = u(-1.0, 1.0);
    EXPECT_LE(M.bilinear(v, v), K.bilinear(v, v) / lam + 1e-10);
  }
}

TEST(Properties, EigenvalueBoundsMonotonicityConcavity) {
  const auto m = build_mesh(0, 1, 0, 1, 12, 12);
  const double mu0 = 0.5, mu1 = 2.0;
  Uniform u(37);
  const double lI = lambda_of(m, constant_field(m, SymMat2::identity()));
  for (int t = 0; t < 10; ++t) {
    const auto a = random_field(m, u, mu0, mu1);
    const double la = lambda_of(m, a);
    EXPECT_GE(la, mu0 * lI - 1e-10);
    EXPECT_LE(la, mu1 * lI + 1e-10);

    ElementField<SymMat2> b(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) b[e] = a[e] + random_sym(u, 0.0, 0.5);
    EXPECT_LE(la, lambda_of(m, b) + 1e-10);

    const auto c = random_field(m, u, mu0, mu1);
    const double lc = lambda_of(m, c);
    for (double g : {0.25, 0.5, 0.75}) {
      ElementField<SymMat2> mix(a.size());
      for (std::size_t e = 0; e < a.size(); ++e) mix[e] = (1 - g) * a[e] + g * c[e];
      EXPECT_GE(lambda_of(m, mix), (1 - g) * la + g * lc - 1e-9);
    }
  }
}

TEST(Properties, ExplicitLipschitzBound) {
  const auto m = build_mesh(0, 1, 0, 1, 12, 12);
  const double mu0 = 0.5, mu1 = 2.0;
  Uniform u(38);
  for (int t = 0; t < 20; ++t) {
    const auto a1 = random_field(m, u, mu0, mu1);
    const auto a2 = random_field(m, u, mu0, mu1);
    double dist = 0.0;
    for (std::size_t e = 0; e < a1.size(); ++e) dist = std::max(dist, norm2(a1[e] - a2[e]));
    const double l1 = lambda_of(m, a1), l2 = lambda_of(m, a2);
    EXPECT_LE(l1, l2 + l2 / mu0 * dist + 1e-10);
  }
}
