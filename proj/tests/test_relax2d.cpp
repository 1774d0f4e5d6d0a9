#include <cmath>

#include <gtest/gtest.h>

#include "pev/random.hpp"
#include "pev/relax2d.hpp"

using namespace pev;

namespace {

const NormalForm kNf(0.5, 1.5);

Vec2 on_ray(double ratio2, double sign = 1.0) { return {1.0, sign * std::sqrt(ratio2)}; }

}  // namespace

TEST(NormalForm, ConstantsAndValidation) {
  EXPECT_DOUBLE_EQ(kNf.r_lo(), 0.25 / 0.75);
  EXPECT_DOUBLE_EQ(kNf.r_hi(), 0.75 / 0.25);
  EXPECT_DOUBLE_EQ(kNf.s(), 0.75);
  const SymMat2 g = kNf.G(1.0);
  EXPECT_NEAR(g.trace(), 1.0, 1e-15);
  EXPECT_NEAR(g.det(), 0.0, 1e-15);
  EXPECT_THROW(NormalForm(1.2, 1.5), Error);
  EXPECT_THROW(NormalForm(0.5, 0.9), Error);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify({0, 0}, kNf), Region::Zero);
  EXPECT_EQ(classify({1, 0}, kNf), Region::EA0);
  EXPECT_EQ(classify({0, 1}, kNf), Region::EI);
  EXPECT_EQ(classify({1, 1}, kNf), Region::EPlus);
  EXPECT_EQ(classify({1, -1}, kNf), Region::EMinus);
  EXPECT_EQ(classify({-1, -1}, kNf), Region::EPlus);
  EXPECT_EQ(classify(on_ray(kNf.r_lo()), kNf), Region::EA0);
  EXPECT_EQ(classify(on_ray(kNf.r_hi() * (1 + 1e-12)), kNf), Region::EI);
}

TEST(Classify, SymmetricUnderNegation) {
  Uniform u(71);
  for (int t = 0; t < 1000; ++t) {
    const Vec2 xi{u(-1, 1), u(-1, 1)};
    EXPECT_EQ(classify(xi, kNf), classify(-1.0 * xi, kNf));
  }
}

TEST(EffectiveF, HomogeneousAndOdd) {
  Uniform u(72);
  for (int t = 0; t < 1000; ++t) {
    const Vec2 xi{u(-1, 1), u(-1, 1)};
    const double c = u(0.1, 10.0);
    const Vec2 a = effective_F(c * xi, kNf), b = c * effective_F(xi, kNf);
    EXPECT_NEAR(a.x1, b.x1, 1e-12 * c);
    EXPECT_NEAR(a.x2, b.x2, 1e-12 * c);
    const Vec2 n = effective_F(-1.0 * xi, kNf), f = effective_F(xi, kNf);
    EXPECT_NEAR(n.x1, -f.x1, 1e-15);
    EXPECT_NEAR(n.x2, -f.x2, 1e-15);
  }
}

TEST(EffectiveF, ContinuousAcrossConeBoundaries) {
  for (double r : {kNf.r_lo(), kNf.r_hi()}) {
    for (double sign : {1.0, -1.0}) {
      const Vec2 lo = effective_F(on_ray(r * (1 - 1e-9), sign), kNf);
      const Vec2 hi = effective_F(on_ray(r * (1 + 1e-9), sign), kNf);
      EXPECT_NEAR(lo.x1, hi.x1, 1e-7);
      EXPECT_NEAR(lo.x2, hi.x2, 1e-7);
    }
  }
}

TEST(EffectiveF, BelowPurePhasesAndLaminates) {
  Uniform u(73);
  std::vector<SymMat2> lams;
  for (int i = 0; i < 50; ++i) lams.push_back(gamma_param(kNf.A0(), SymMat2::identity(), {u(), random_trace_one_psd(u)}));
  for (int t = 0; t < 1000; ++t) {
    const Vec2 xi{u(-1, 1), u(-1, 1)};
    const double f = dot(effective_F(xi, kNf), xi);
    const double scale = dot(xi, xi);
    EXPECT_LE(f, quad(kNf.A0(), xi) + 1e-12 * scale);
    EXPECT_LE(f, scale + 1e-12 * scale);
    for (const auto& L : lams) EXPECT_LE(f, quad(L, xi) + 1e-12 * scale);
  }
}

TEST(Abar, ClosedFormOnLaminateCones) {
  Uniform u(74);
  int hits = 0;
  while (hits < 300) {
    const Vec2 xi{u(-1, 1), u(-1, 1)};
    const Region r = classify(xi, kNf);
    if (r != Region::EPlus && r != Region::EMinus) continue;
    ++hits;
    const AbarResult ar = abar(xi, kNf);
    ASSERT_TRUE(ar.lam.has_value());
    const LamClosedForm& lc = *ar.lam;
    EXPECT_GE(lc.gamma, -1e-12);
    EXPECT_LE(lc.gamma, 1.0 + 1e-12);
    const Vec2 ax = ar.A * xi, gx = lc.G * xi;
    EXPECT_NEAR(ax.x1, gx.x1, 1e-12);
    EXPECT_NEAR(ax.x2, gx.x2, 1e-12);
    EXPECT_NEAR(ax.x1, lc.C_xi * lc.epsilon_sign * std::sqrt(1 - lc.s), 1e-12);
    EXPECT_NEAR(ax.x2, lc.C_xi * std::sqrt(lc.s), 1e-12);
    const BoundMargins bm = bounds_check(kNf.A0(), SymMat2::identity(), lc.gamma, ar.A);
    EXPECT_GE(bm.harmonic, -1e-10);
    EXPECT_GE(bm.arithmetic, -1e-10);
    EXPECT_NEAR(density_proxy(xi, kNf), lc.gamma, 1e-15);
  }
}

TEST(Abar, PurePhaseCones) {
  EXPECT_EQ(abar({1, 0}, kNf).A, kNf.A0());
  EXPECT_EQ(abar({0, 1}, kNf).A, SymMat2::identity());
  EXPECT_EQ(abar({0, 0}, kNf).A, SymMat2::identity());
  EXPECT_FALSE(abar({1, 0}, kNf).lam.has_value());
  EXPECT_EQ(density_proxy({1, 0}, kNf), 0.0);
  EXPECT_EQ(density_proxy({0, 1}, kNf), 1.0);
}

TEST(NormalFormOf, RejectsOtherBounds) {
  const ControlBounds ok(0.5, 1.5, 0.0, 1.0, SymMat2::diag(0.5, 1.5), SymMat2::identity());
  EXPECT_NO_THROW(normal_form_of(ok));
  const ControlBounds rotated(0.5, 1.5, 0.0, 1.0, SymMat2::diag(1.5, 0.5), SymMat2::identity());
  EXPECT_THROW(normal_form_of(rotated), Error);
  const ControlBounds window(0.5, 1.5, 0.2, 0.5, SymMat2::diag(0.5, 1.5), SymMat2::identity());
  EXPECT_THROW(normal_form_of(window), Error);
}

class RelaxedMin : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    mesh_ = new Mesh2D(build_mesh(-1, 1, -1, 1, 24, 24));
    rep_ = new MinReport(solve_relaxed_min(bounds(), *mesh_));
  }
  static void TearDownTestSuite() {
    delete rep_;
    delete mesh_;
  }
  static ControlBounds bounds() { return {0.5, 1.5, 0.0, 1.0, SymMat2::diag(0.5, 1.5), SymMat2::identity()}; }
  static inline Mesh2D* mesh_ = nullptr;
  static inline MinReport* rep_ = nullptr;
};

TEST_F(RelaxedMin, ConvergesBelowPurePhases) {
  ASSERT_TRUE(rep_->converged);
  const double l0 = solve_principal(*mesh_, constant_field(*mesh_, kNf.A0())).lambda;
  const double l1 = solve_principal(*mesh_, constant_field(*mesh_, SymMat2::identity())).lambda;
  EXPECT_LE(rep_->lambda, std::min(l0, l1) + 1e-10);
  EXPECT_LT(rep_->state_residual, 1e-2);
}

TEST_F(RelaxedMin, FixedPointHistoryNonincreasing) {
  const auto& h = rep_->fixed_point_history;
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] * (1 + 1e-9));
  for (std::size_t f : rep_->descent_failures) EXPECT_EQ(f, 0u);
}

TEST_F(RelaxedMin, RegionCountsAndPointwiseConditions) {
  std::size_t total = 0;
  for (auto c : rep_->region_counts) total += c;
  EXPECT_EQ(total, mesh_->num_elements());
  const PointwiseViolations v = verify_pointwise_conditions(*rep_, *mesh_, kNf, 1e-6);
  EXPECT_EQ(v.in_A0, 0.0);
  EXPECT_EQ(v.in_A1, 0.0);
  EXPECT_EQ(v.equality_on_laminates, 0.0);
  EXPECT_EQ(v.against_laminates, 0.0);
}

TEST_F(RelaxedMin, BangBangStructure) {
  const BangBangReport bb = h_field_and_bangbang(*rep_, *mesh_, kNf);
  EXPECT_EQ(bb.structure_violation, 0.0);
  EXPECT_NEAR(bb.multiplier_mu0 * bb.multiplier_mu0 + bb.multiplier_psi * bb.multiplier_psi, 1.0, 1e-14);
  EXPECT_LE(bb.multiplier_mu0, 0.0);
  for (double s : bb.sigma) {
    EXPECT_GE(s, -1e-12);
    EXPECT_LE(s, 1.0 + 1e-12);
  }
}

TEST_F(RelaxedMin, Deterministic) {
  const MinReport again = solve_relaxed_min(bounds(), *mesh_);
  EXPECT_EQ(again.lambda, rep_->lambda);
  EXPECT_EQ(again.y, rep_->y);
}
