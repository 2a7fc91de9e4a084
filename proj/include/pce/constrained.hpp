#pragma once

#include <Eigen/Core>

#include "pce/approximators.hpp"
#include "pce/basis.hpp"
#include "pce/expectation.hpp"

namespace pce {

inline constexpr double kFeasibilityTolerance = 1e-10;

/// Target first and second moments with a lower-triangular factor L of the
/// covariance: L L^T = second - mean mean^T.
///
/// When the covariance is singular (deterministic components), directions with
/// eigenvalue below 1e-12 * trace are dropped from L and listed in `deficient`.
struct MomentConstraint {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;
  Eigen::MatrixXd cholesky;
  Eigen::MatrixXd deficient;
  Eigen::Index rank = 0;

  static MomentConstraint from(const Eigen::VectorXd& mean, const Eigen::MatrixXd& second);
  static MomentConstraint from(const MomentSet& moments) { return from(moments.mean, moments.second); }

  Eigen::Index dim() const { return mean.size(); }
  bool singular() const { return rank < dim(); }
};

/// n x N matrix with orthonormal rows (U U^T = I within 1e-10).
class FeasibleU {
 public:
  explicit FeasibleU(Eigen::MatrixXd matrix);
  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

struct ConstrainedOptions {
  // Accept a singular covariance factor and solve L X = B in the least-squares
  // sense on its range. When false, a singular factor raises SingularFactor.
  bool allow_singular = true;
  double max_condition = kMaxCondition;
};

/// F = [mean, L U W1^{-1/2}]: matches the constraint's mean and second moment
/// for every feasible U.
PCExpansion assemble_theorem1(const MomentConstraint& constraint, const BasisSet& basis, const FeasibleU& u);

/// U_GP = L^{-1} R W1^{-1/2}, the unconstrained minimizer of the L2 cost.
Eigen::MatrixXd unconstrained_u(const MomentSet& moments, const BasisSet& basis,
                                const ConstrainedOptions& options = {});

/// Moment-matching coefficients closest (after projection) to Galerkin projection.
PCExpansion solve_constrained_L2(const MomentSet& moments, const BasisSet& basis,
                                 const ConstrainedOptions& options = {});

/// Moment-matching coefficients closest (after projection) to the least-squares
/// fit over `grid` (one point per column). `weights`, when non-empty, weights
/// each grid point's residual; the default is the plain sum of squares.
PCExpansion solve_constrained_l2(const Eigen::MatrixXd& grid, const MomentSet& moments, const BasisSet& basis,
                                 const VectorFunction& f, const ConstrainedOptions& options = {},
                                 const Eigen::VectorXd& weights = Eigen::VectorXd());

/// Nearest row-orthonormal matrix to `a` (rows <= cols).
FeasibleU project_to_orthonormal_rows(const Eigen::MatrixXd& a);

/// J_U - J_GP = ||L U - R W1^{-1/2}||_F^2 for the coefficients assembled from U.
double gp_cost_gap(const MomentSet& moments, const BasisSet& basis, const FeasibleU& u);

}  // namespace pce
