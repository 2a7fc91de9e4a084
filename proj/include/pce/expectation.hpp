#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "pce/basis.hpp"

namespace pce {

/// Vector-valued function of the random parameter.
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Points (one per column, in the parameter's own coordinates) and weights
/// summing to one. Every expectation is a weighted sum over such a set.
struct NodeSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
};

struct Quadrature {
  int points_per_dim = 8;
};

struct MonteCarlo {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct WeightedGrid {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;
};

/// How E[.] is computed: tensor Gauss-Legendre, seeded Monte Carlo, or a
/// user grid. Immutable once built.
class ExpectationEngine {
 public:
  static ExpectationEngine quadrature(int points_per_dim);
  static ExpectationEngine monte_carlo(std::size_t samples, std::uint64_t seed);
  static ExpectationEngine weighted_grid(Eigen::MatrixXd nodes, Eigen::VectorXd weights);

  /// 2 * order + 4 points per dimension: exact for every basis product
  /// against polynomial integrands up to the basis order.
  static ExpectationEngine default_for(int order) { return quadrature(2 * order + 4); }

  NodeSet nodes(const UniformParameter& param) const;

  bool is_monte_carlo() const { return std::holds_alternative<MonteCarlo>(kind_); }
  const std::variant<Quadrature, MonteCarlo, WeightedGrid>& kind() const { return kind_; }

 private:
  explicit ExpectationEngine(std::variant<Quadrature, MonteCarlo, WeightedGrid> kind)
      : kind_(std::move(kind)) {}
  std::variant<Quadrature, MonteCarlo, WeightedGrid> kind_;
};

/// Uniform [0, 1) double from a counter: splitmix64(seed, counter) >> 11.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

/// E[g(Delta)]. Summation is sequential in node order.
Eigen::VectorXd expect(const ExpectationEngine& engine, const UniformParameter& param,
                       const VectorFunction& g);

/// E[g] together with its standard error (zero for deterministic rules).
struct Estimate {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;
};
Estimate expect_with_error(const ExpectationEngine& engine, const UniformParameter& param,
                           const VectorFunction& g);

/// First two moments of f and its projection onto the non-constant basis.
struct MomentSet {
  Eigen::VectorXd mean;        // m = E[f]
  Eigen::MatrixXd second;      // S = E[f f^T]
  Eigen::MatrixXd covariance;  // Q = S - m m^T
  Eigen::MatrixXd cross;       // R = E[f Phi_1^T]

  static MomentSet from(Eigen::VectorXd mean, Eigen::MatrixXd second, Eigen::MatrixXd cross);
  Eigen::Index dim() const { return mean.size(); }
};

MomentSet moments_of(const ExpectationEngine& engine, const UniformParameter& param,
                     const BasisSet& basis, const VectorFunction& f);

/// Reads a weighted grid from CSV with columns Delta_1..Delta_d, w. A first
/// line that does not parse as numbers is taken as a header. Weights must be
/// positive and sum to one within 1e-12.
ExpectationEngine load_weighted_grid_csv(const std::string& path);

}  // namespace pce
