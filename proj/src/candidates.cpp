#include "pce/candidates.hpp"

#include <algorithm>
#include <cmath>

#include "pce/errors.hpp"
#include "pce/quadrature.hpp"

namespace pce {

namespace {

constexpr int kTruthPoints = 128;
constexpr int kSmoothPoints = 64;

std::array<double, 4> quadrature_truth(const std::function<double(double)>& f, int points) {
  const auto rule = gauss_legendre(points);
  std::array<double, 4> out{};
  for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
    const double v = f(rule.nodes(j));
    double p = 1.0;
    for (int m = 0; m < 4; ++m) {
      p *= v;
      out[static_cast<std::size_t>(m)] += rule.weights(j) * p;
    }
  }
  return out;
}

}  // namespace

VectorFunction Candidate::as_vector() const {
  auto g = f;
  return [g](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, g(x(0))); };
}

int Candidate::quadrature_points(int order) const {
  if (polynomial_degree < 0) return std::max(kSmoothPoints, 2 * order + 4);
  return std::max(2 * order + 4, polynomial_degree + 1);
}

std::vector<std::string> candidate_ids() { return {"delta8", "rational", "sin2", "gaussbump"}; }

Candidate make_candidate(const std::string& id, const std::vector<double>& custom_coeffs) {
  Candidate c;
  c.id = id;
  if (id == "delta8") {
    c.label = "Delta^8";
    c.f = [](double x) { return std::pow(x, 8); };
    c.polynomial_degree = 8;
    for (int m = 1; m <= 4; ++m) c.truth[static_cast<std::size_t>(m - 1)] = 1.0 / (8.0 * m + 1.0);
    return c;
  }
  if (id == "rational") {
    c.label = "1/(1+Delta+Delta^2)";
    c.f = [](double x) { return 1.0 / (1.0 + x + x * x); };
  } else if (id == "sin2") {
    c.label = "sin^2(3 Delta)";
    c.f = [](double x) {
      const double s = std::sin(3.0 * x);
      return s * s;
    };
  } else if (id == "gaussbump") {
    c.label = "exp(-10 Delta^2)";
    c.f = [](double x) { return std::exp(-10.0 * x * x); };
  } else if (id == "custom") {
    if (custom_coeffs.empty()) throw InvalidArgument("custom candidate needs at least one coefficient");
    c.label = "custom polynomial";
    const std::vector<double> coeffs = custom_coeffs;
    c.f = [coeffs](double x) {
      double acc = 0.0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
    c.polynomial_degree = static_cast<int>(coeffs.size()) - 1;
    c.truth = quadrature_truth(c.f, std::max(kTruthPoints, 2 * c.polynomial_degree + 2));
    return c;
  } else {
    throw InvalidArgument("unknown function id '" + id + "'");
  }
  c.truth = quadrature_truth(c.f, kTruthPoints);
  return c;
}

}  // namespace pce
