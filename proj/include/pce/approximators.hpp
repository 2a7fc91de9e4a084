#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Core>

#include "pce/basis.hpp"
#include "pce/expectation.hpp"

namespace pce {

/// f_hat(x) = F Phi(x) with F of size n x (N+1).
class PCExpansion {
 public:
  PCExpansion(BasisSet basis, Eigen::MatrixXd coeffs);

  const BasisSet& basis() const { return basis_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::Index dim() const { return coeffs_.rows(); }

 private:
  BasisSet basis_;
  Eigen::MatrixXd coeffs_;
};

/// f_hat(x) = F_SC Psi(x) with column j of F_SC equal to f at node j.
struct SCInterpolant {
  LagrangeBasis basis;
  Eigen::MatrixXd values;
};

inline constexpr double kMaxCondition = 1e12;
inline constexpr std::uint64_t kDefaultGridSeed = 0x5eed2020ULL;

/// Galerkin projection: F = E[f Phi^T] W^{-1}.
PCExpansion solve_gp(const ExpectationEngine& engine, const BasisSet& basis, const VectorFunction& f);

/// Interpolates f at the given nodes (one per column).
SCInterpolant solve_sc(const Eigen::MatrixXd& nodes, const VectorFunction& f);

/// Default collocation nodes: order+1 Gauss-Legendre points for d = 1. For
/// d > 1 the product Lagrange form needs coordinate-wise distinct nodes, so
/// basis_size(d, order) seeded uniform samples are drawn instead.
Eigen::MatrixXd default_sc_nodes(const UniformParameter& param, int order,
                                 std::uint64_t seed = kDefaultGridSeed);

/// Least squares over the grid columns: F = H1^T H2^{-1}, solved by SVD of the
/// design matrix. Throws IllConditioned when cond(H2) exceeds max_condition.
PCExpansion solve_ls(const Eigen::MatrixXd& grid, const BasisSet& basis, const VectorFunction& f,
                     double max_condition = kMaxCondition);

/// 2(N+1) i.i.d. uniform samples drawn with a counter-based generator.
Eigen::MatrixXd default_ls_grid(const BasisSet& basis, std::uint64_t seed = kDefaultGridSeed);

/// `count` i.i.d. uniform samples on the parameter box (one per column).
Eigen::MatrixXd uniform_samples(const UniformParameter& param, Eigen::Index count, std::uint64_t seed);

Eigen::VectorXd eval_expansion(const PCExpansion& expansion, const Eigen::Ref<const Eigen::VectorXd>& point);
Eigen::VectorXd eval_expansion(const SCInterpolant& interpolant, const Eigen::Ref<const Eigen::VectorXd>& point);

struct ExpansionMoments {
  Eigen::VectorXd mean;    // F e_1
  Eigen::MatrixXd second;  // F W F^T
};

ExpansionMoments expansion_moments(const PCExpansion& expansion);

/// CSV with a one-line JSON header comment:
///   # {"format":"pce-expansion","version":1,"order":..,"bounds":[[lo,hi],..],
///      "ordering":"graded-lex","indices":[[..],..],"rows":n}
/// followed by one row per output dimension, one column per basis index.
void write_expansion_csv(std::ostream& out, const PCExpansion& expansion);
PCExpansion read_expansion_csv(std::istream& in);

}  // namespace pce
