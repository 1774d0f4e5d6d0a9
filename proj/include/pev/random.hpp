#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "pev/dense_sym.hpp"

namespace pev {

/// Reproducible uniform doubles in [0,1): raw mt19937_64 bits, no distribution object,
/// so sequences are identical across standard libraries.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : eng_(seed) {}
  double operator()() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 eng_;
};

inline Vec2 random_unit(Uniform& u) {
  const double phi = u(0.0, 2.0 * std::numbers::pi);
  return {std::cos(phi), std::sin(phi)};
}

/// Q diag(l1, l2) Q^T with a random rotation Q and eigenvalues uniform in [lo, hi].
inline SymMat2 random_sym(Uniform& u, double lo, double hi) {
  const double l1 = u(lo, hi), l2 = u(lo, hi);
  const Vec2 v = random_unit(u);
  return SymMat2::scalar(l2) + (l1 - l2) * SymMat2::outer(v);
}

/// Random H >= 0 with tr(H) = 1.
inline SymMat2 random_trace_one_psd(Uniform& u) {
  const double w = u();
  const Vec2 v = random_unit(u);
  const Vec2 vp{-v.x2, v.x1};
  return w * SymMat2::outer(v) + (1.0 - w) * SymMat2::outer(vp);
}

}  // namespace pev
