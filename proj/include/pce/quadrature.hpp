#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Core>

#include "pce/errors.hpp"

namespace pce {

/// Legendre polynomials P_0..P_degree at x via the three-term recurrence
/// (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}. `out` must hold degree+1 values.
template <typename Scalar>
void legendre_values(Scalar x, int degree, Scalar* out) {
  out[0] = Scalar(1);
  if (degree >= 1) out[1] = x;
  for (int k = 1; k < degree; ++k) {
    out[k + 1] = (Scalar(2 * k + 1) * x * out[k] - Scalar(k) * out[k - 1]) / Scalar(k + 1);
  }
}

template <typename Scalar>
struct GaussRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1] with weights normalized to sum to 1
/// (i.e. integration against the uniform probability density). Exact for
/// polynomials of degree <= 2m - 1.
template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(int m) {
  using std::abs;
  using std::cos;
  if (m < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  GaussRule<Scalar> rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    // Newton on P_m from the Tricomi-style initial guess.
    Scalar x = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(m) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (int k = 1; k < m; ++k) {
        const Scalar p2 = (Scalar(2 * k + 1) * x * p1 - Scalar(k) * p0) / Scalar(k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = Scalar(m) * (x * p1 - p0) / (x * x - Scalar(1));
      const Scalar dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon()) break;
    }
    // One more derivative evaluation at the converged root.
    Scalar p0 = 1, p1 = x;
    for (int k = 1; k < m; ++k) {
      const Scalar p2 = (Scalar(2 * k + 1) * x * p1 - Scalar(k) * p0) / Scalar(k + 1);
      p0 = p1;
      p1 = p2;
    }
    dp = Scalar(m) * (x * p1 - p0) / (x * x - Scalar(1));
    const Scalar w = Scalar(1) / ((Scalar(1) - x * x) * dp * dp);  // 2/(...) halved
    rule.nodes(i) = -x;
    rule.nodes(m - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(m - 1 - i) = w;
  }
  if (m % 2 == 1) rule.nodes(m / 2) = Scalar(0);
  return rule;
}

}  // namespace pce
