#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pce/expectation.hpp"

namespace pce {

/// Scalar test function of Delta ~ U[-1, 1] with reference raw moments.
struct Candidate {
  std::string id;
  std::string label;
  std::function<double(double)> f;
  int polynomial_degree = -1;       // -1 when f is not a polynomial
  std::array<double, 4> truth{};    // E[f^m], m = 1..4

  VectorFunction as_vector() const;

  /// Gauss-Legendre points per dimension for projecting onto an order-kappa
  /// basis: exact for E[f Phi] and E[f^2] when f is a polynomial.
  int quadrature_points(int order) const;
};

/// delta8, rational, sin2, gaussbump.
std::vector<std::string> candidate_ids();

/// Looks up a registered candidate. `custom` builds the polynomial
/// sum_i coeffs[i] Delta^i. Unknown ids throw InvalidArgument.
Candidate make_candidate(const std::string& id, const std::vector<double>& custom_coeffs = {});

}  // namespace pce
