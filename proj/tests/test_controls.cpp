#include <cmath>
#include <functional>
#include <string>

#include <gtest/gtest.h>

#include "pev/controls.hpp"
#include "pev/random.hpp"

using namespace pev;

namespace {

ControlBounds example_bounds() { return {0.5, 1.5, 0.0, 1.0, SymMat2::diag(0.5, 1.5), SymMat2::identity()}; }

ControlBounds window(double alpha, double beta) {
  return {0.5, 1.0, alpha, beta, SymMat2::scalar(0.5), SymMat2::identity()};
}

void expect_validation(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
    FAIL() << "expected Validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(ControlBounds, AcceptsAdmissibleWindows) {
  EXPECT_NO_THROW(example_bounds());
  EXPECT_NO_THROW(window(0.2, 0.5));
  EXPECT_NO_THROW(window(0.3, 0.3));
}

TEST(ControlBounds, RejectsInadmissible) {
  expect_validation([] { window(0.6, 0.4); }, "alpha <= beta");
  expect_validation([] { window(0.0, 0.5); }, "admissibility");
  expect_validation([] { window(0.0, 1.0); }, "Loewner-incomparable");
  expect_validation([] { ControlBounds(0.0, 1.0, 0.2, 0.5, SymMat2::scalar(0.5), SymMat2::identity()); }, "mu0");
  expect_validation([] { ControlBounds(0.5, 1.0, 0.2, 0.5, SymMat2::scalar(0.4), SymMat2::identity()); }, "A0");
  expect_validation([] { ControlBounds(0.5, 1.0, 0.2, 0.5, SymMat2::scalar(0.5), SymMat2::scalar(1.1)); }, "A1");
}

TEST(ControlBounds, BasicModeAllowsDegenerateWindow) {
  EXPECT_NO_THROW(ControlBounds(0.5, 1.0, 1.0, 1.0, SymMat2::scalar(0.5), SymMat2::identity(), Admissibility::Basic));
  expect_validation([] { window(1.0, 1.0); }, "admissibility");
}

TEST(CoefficientFromDensity, Examples) {
  const auto m = build_mesh(0, 1, 0, 1, 3, 3);
  const auto b = example_bounds();
  for (const auto& a : coefficient_from_density(constant_density(m, 0.0), b)) EXPECT_EQ(a, b.A0);
  for (const auto& a : coefficient_from_density(constant_density(m, 1.0), b)) EXPECT_EQ(a, b.A1);
  for (const auto& a : coefficient_from_density(constant_density(m, 0.5), b)) {
    EXPECT_DOUBLE_EQ(a.a11, 0.75);
    EXPECT_DOUBLE_EQ(a.a12, 0.0);
    EXPECT_DOUBLE_EQ(a.a22, 1.25);
  }
}

TEST(CoefficientFromDensity, OutOfRangeAndMembership) {
  const auto m = build_mesh(0, 1, 0, 1, 3, 3);
  const auto b = example_bounds();
  DensityField s = constant_density(m, 0.5);
  s[4] = 1.2;
  try {
    coefficient_from_density(s, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
  Uniform u(41);
  for (auto& v : s.sigma) v = u();
  for (const auto& a : coefficient_from_density(s, b)) EXPECT_TRUE(in_bounds(a, b.mu0, b.mu1));
}

TEST(CoefficientFromDensity, LoewnerOrderPreserved) {
  const auto m = build_mesh(0, 1, 0, 1, 4, 4);
  const auto b = window(0.2, 0.5);  // A1 - A0 = 0.5 I is PSD
  Uniform u(42);
  DensityField s = constant_density(m, 0.0), t = constant_density(m, 0.0);
  for (std::size_t e = 0; e < s.size(); ++e) {
    s[e] = u();
    t[e] = s[e] + (1.0 - s[e]) * u();
  }
  const auto as = coefficient_from_density(s, b), at = coefficient_from_density(t, b);
  for (std::size_t e = 0; e < as.size(); ++e) EXPECT_TRUE(loewner_leq(as[e], at[e]));
}

TEST(ProjectDensity, FeasibleUnchanged) {
  const auto m = build_mesh(0, 1, 0, 1, 6, 6);
  const auto b = window(0.2, 0.5);
  Uniform u(43);
  DensityField s = constant_density(m, 0.0);
  for (auto& v : s.sigma) v = u(0.2, 0.5);
  ASSERT_TRUE(is_feasible(m, s, b));
  EXPECT_EQ(project_density(m, s, b), s);
}

TEST(ProjectDensity, UniformRawHitsActiveBound) {
  const auto m = build_mesh(-1, 1, -1, 1, 8, 8);
  const auto b = window(0.2, 0.5);
  const DensityField hi = project_density(m, ElementField<double>(m.num_elements(), 2.0), b);
  EXPECT_NEAR(volume(m, hi), 0.5 * m.domain_area(), 1e-12 * m.domain_area());
  for (double v : hi.sigma) EXPECT_NEAR(v, 0.5, 1e-12);
  const DensityField lo = project_density(m, ElementField<double>(m.num_elements(), -1.0), b);
  EXPECT_NEAR(volume(m, lo), 0.2 * m.domain_area(), 1e-12 * m.domain_area());
  for (double v : lo.sigma) EXPECT_NEAR(v, 0.2, 1e-12);
}

TEST(ProjectDensity, IdempotentAndClippedShift) {
  const auto m = build_mesh(0, 2, 0, 1, 10, 6);
  const auto b = window(0.2, 0.5);
  Uniform u(44);
  for (int t = 0; t < 100; ++t) {
    ElementField<double> raw(m.num_elements());
    const double c = u(-1.5, 2.5);
    for (auto& v : raw) v = c + u(-1.0, 1.0);
    const DensityField p = project_density(m, raw, b);
    EXPECT_TRUE(is_feasible(m, p, b));
    EXPECT_EQ(project_density(m, p, b), p);
    // Every unclipped entry is shifted by one common tau; clipped entries lie beyond it.
    double tau = std::nan("");
    for (std::size_t e = 0; e < raw.size(); ++e) {
      if (p[e] > 0.0 && p[e] < 1.0) {
        if (std::isnan(tau)) tau = p[e] - raw[e];
        EXPECT_NEAR(p[e] - raw[e], tau, 1e-10);
      }
    }
    if (std::isnan(tau)) continue;
    for (std::size_t e = 0; e < raw.size(); ++e) {
      if (p[e] == 0.0) {
        EXPECT_LE(raw[e] + tau, 1e-10);
      }
      if (p[e] == 1.0) {
        EXPECT_GE(raw[e] + tau, 1.0 - 1e-10);
      }
    }
  }
}

TEST(ProjectDensity, VolumeTolerance) {
  const auto m = build_mesh(0, 1, 0, 1, 16, 16);
  const auto b = window(0.2, 0.5);
  Uniform u(45);
  ElementField<double> raw(m.num_elements());
  for (auto& v : raw) v = u(0.4, 1.4);
  const DensityField p = project_density(m, raw, b);
  EXPECT_LE(std::abs(volume(m, p) - 0.5 * m.domain_area()), 1e-12 * m.domain_area());
}

TEST(LinfDistance, Examples) {
  const auto m = build_mesh(0, 1, 0, 1, 3, 3);
  Uniform u(46);
  ElementField<SymMat2> a(m.num_elements());
  for (auto& x : a) x = random_sym(u, 0.5, 1.5);
  EXPECT_EQ(linf_distance(a, a), 0.0);
  ElementField<SymMat2> b = a;
  for (auto& x : b) x = x + SymMat2::scalar(1e-3);
  EXPECT_NEAR(linf_distance(a, b), 1e-3, 1e-15);
  EXPECT_DOUBLE_EQ(linf_distance(constant_field(m, SymMat2::diag(0.5, 1.5)), constant_field(m, SymMat2::identity())), 0.5);
  try {
    linf_distance(a, ElementField<SymMat2>(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FieldSizeMismatch);
  }
}
