#include <cmath>

#include <gtest/gtest.h>

#include "pev/maximize.hpp"
#include "pev/random.hpp"

using namespace pev;

namespace {

ControlBounds volume_bounds() { return {0.5, 1.0, 0.2, 0.5, SymMat2::scalar(0.5), SymMat2::identity()}; }

double lambda_of(const Mesh2D& m, const DensityField& s, const ControlBounds& b) {
  EigenOptions o;
  o.lambda_tol = 1e-13;
  o.residual_tol = 1e-10;
  o.cg_tol = 1e-13;
  return solve_principal(m, coefficient_from_density(s, b), o).lambda;
}

}  // namespace

TEST(DensityGradient, MatchesFiniteDifferences) {
  const auto m = build_mesh(-1, 1, -1, 1, 10, 10);
  const auto b = volume_bounds();
  Uniform u(51);
  DensityField s = constant_density(m, 0.0);
  for (auto& v : s.sigma) v = u(0.2, 0.8);
  const EigenPair p = solve_principal(m, coefficient_from_density(s, b));
  const auto g = density_gradient(m, b, p);

  ElementField<double> dir(m.num_elements());
  for (auto& v : dir) v = u(-1.0, 1.0);
  double pred = 0.0;
  for (std::size_t e = 0; e < dir.size(); ++e) pred += m.element_area[e] * g[e] * dir[e];

  const double h = 1e-5;
  DensityField sp = s, sm = s;
  for (std::size_t e = 0; e < dir.size(); ++e) {
    sp[e] += h * dir[e];
    sm[e] -= h * dir[e];
  }
  const double fd = (lambda_of(m, sp, b) - lambda_of(m, sm, b)) / (2 * h);
  EXPECT_NEAR(fd, pred, 1e-5 * std::abs(pred) + 1e-8);
}

TEST(DirectionalDerivative, ZeroAtSameFieldAndLinear) {
  const auto m = build_mesh(0, 1, 0, 1, 8, 8);
  Uniform u(52);
  ElementField<SymMat2> a(m.num_elements()), c(m.num_elements()), c2(m.num_elements());
  for (auto& x : a) x = random_sym(u, 0.5, 1.5);
  for (auto& x : c) x = random_sym(u, 0.5, 1.5);
  for (std::size_t e = 0; e < a.size(); ++e) c2[e] = a[e] + 2.0 * (c[e] - a[e]);
  const EigenPair p = solve_principal(m, a);
  EXPECT_EQ(directional_derivative(m, a, a, p), 0.0);
  EXPECT_NEAR(directional_derivative(m, a, c2, p), 2.0 * directional_derivative(m, a, c, p), 1e-12);
}

TEST(DirectionalDerivative, ConcavitySupportingHyperplane) {
  const auto m = build_mesh(0, 1, 0, 1, 10, 10);
  Uniform u(53);
  for (int t = 0; t < 5; ++t) {
    ElementField<SymMat2> a(m.num_elements()), c(m.num_elements());
    for (auto& x : a) x = random_sym(u, 0.5, 1.5);
    for (auto& x : c) x = random_sym(u, 0.5, 1.5);
    const EigenPair p = solve_principal(m, a);
    const double lc = solve_principal(m, c).lambda;
    EXPECT_LE(lc, p.lambda + directional_derivative(m, a, c, p) + 1e-9);
  }
}

TEST(Ascend, MonotoneFeasibleAndConverges) {
  const auto m = build_mesh(-1, 1, -1, 1, 16, 16);
  const auto b = volume_bounds();
  const OptimReport r = ascend(b, m, constant_density(m, 0.35));
  EXPECT_TRUE(r.converged);
  ASSERT_GE(r.lambda_history.size(), 2u);
  for (std::size_t i = 1; i < r.lambda_history.size(); ++i) EXPECT_GE(r.lambda_history[i], r.lambda_history[i - 1]);
  EXPECT_TRUE(is_feasible(m, r.sigma_final, b));
  EXPECT_GT(r.lambda_history.back(), r.lambda_history.front());
  EXPECT_GT(r.step0, 0.0);
  EXPECT_EQ(r.lambda_history.back(), r.pair.lambda);
}

TEST(Ascend, StationaryAgainstRandomFeasiblePerturbations) {
  const auto m = build_mesh(-1, 1, -1, 1, 12, 12);
  const auto b = volume_bounds();
  const OptimReport r = ascend(b, m, constant_density(m, 0.35));
  ASSERT_TRUE(r.converged);
  const auto g = density_gradient(m, b, r.pair);
  Uniform u(54);
  std::vector<DensityField> others;
  for (int t = 0; t < 20; ++t) {
    ElementField<double> raw(m.num_elements());
    for (auto& v : raw) v = u();
    others.push_back(project_density(m, raw, b));
  }
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  EXPECT_LE(variational_residual(m, g, r.sigma_final, others), 1e-3 * gmax * m.domain_area());
}

TEST(Ascend, PinnedVolumeKeepsVolume) {
  const auto m = build_mesh(0, 1, 0, 1, 12, 12);
  const ControlBounds b(0.5, 1.0, 0.3, 0.3, SymMat2::scalar(0.5), SymMat2::identity());
  AscentOptions o;
  o.max_iter = 50;
  const OptimReport r = ascend(b, m, constant_density(m, 0.3), o);
  EXPECT_NEAR(volume(m, r.sigma_final), 0.3 * m.domain_area(), 1e-12);
  EXPECT_EQ(r.kkt.volume_case, VolumeCase::Pinned);
}

TEST(Ascend, RejectsInfeasibleStart) {
  const auto m = build_mesh(0, 1, 0, 1, 6, 6);
  try {
    ascend(volume_bounds(), m, constant_density(m, 0.9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
}

TEST(Ascend, EqualCoefficientsAreTriviallyStationary) {
  const auto m = build_mesh(0, 1, 0, 1, 6, 6);
  const ControlBounds b(0.5, 1.0, 0.2, 0.5, SymMat2::identity(), SymMat2::identity(), Admissibility::Basic);
  const OptimReport r = ascend(b, m, constant_density(m, 0.3));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.lambda_history.size(), 1u);
}

TEST(KktCheck, ClassifiesSetsAndVolumeCase) {
  const auto m = build_mesh(0, 1, 0, 1, 8, 8);
  const auto b = volume_bounds();
  DensityField s = constant_density(m, 0.0);
  for (std::size_t e = 0; e < s.size(); ++e) s[e] = e % 4 == 0 ? 1.0 : (e % 4 == 1 ? 0.5 : 0.0);
  const EigenPair p = solve_principal(m, coefficient_from_density(s, b));
  const KktRecord k = kkt_check(m, s, p, b);
  EXPECT_EQ(k.count_zero + k.count_intermediate + k.count_one, m.num_elements());
  EXPECT_EQ(k.count_one, m.num_elements() / 4);
  EXPECT_EQ(k.count_intermediate, m.num_elements() / 4);
  EXPECT_NEAR(k.volume, 0.375 * m.domain_area(), 1e-14);
  EXPECT_EQ(k.volume_case, VolumeCase::Interior);
  EXPECT_FALSE(k.empty_intermediate);
  EXPECT_GE(k.ordering_violation, 0.0);
}

TEST(VariationalResidual, ZeroForSelf) {
  const auto m = build_mesh(0, 1, 0, 1, 4, 4);
  const DensityField s = constant_density(m, 0.3);
  ElementField<double> g(m.num_elements(), 1.0);
  EXPECT_EQ(variational_residual(m, g, s, {s}), 0.0);
  EXPECT_NEAR(variational_residual(m, g, s, {constant_density(m, 0.5)}), 0.2, 1e-14);
}
