#include "pce/constrained.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "pce/errors.hpp"
#include "pce/linalg.hpp"

namespace pce {

namespace {

void require_wide_enough(Eigen::Index n, const BasisSet& basis) {
  if (basis.size() - 1 < n) {
    throw InvalidArgument("constrained solver: need N >= n (N = " + std::to_string(basis.size() - 1) +
                          ", n = " + std::to_string(n) + ")");
  }
}

// Solves L X = rhs. Singular factors go through a minimum-norm least-squares
// solve, which leaves the rows of X along deficient directions at zero.
Eigen::MatrixXd solve_factor(const MomentConstraint& c, const Eigen::MatrixXd& rhs,
                             const ConstrainedOptions& options) {
  if (!c.singular()) return c.cholesky.triangularView<Eigen::Lower>().solve(rhs);
  if (!options.allow_singular) {
    throw SingularFactor("covariance factor is singular along " + std::to_string(c.deficient.cols()) +
                             " direction(s); enable allow_singular to truncate them",
                         c.deficient);
  }
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(c.cholesky).solve(rhs);
}

}  // namespace

MomentConstraint MomentConstraint::from(const Eigen::VectorXd& mean, const Eigen::MatrixXd& second) {
  if (second.rows() != mean.size() || second.cols() != mean.size()) {
    throw DimensionMismatch("MomentConstraint: second moment must be n x n");
  }
  MomentConstraint c;
  c.mean = mean;
  c.second = second;
  // Rounding in second - mean mean^T scales with the second moment itself.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * second.diagonal().cwiseAbs().sum();
  const auto factor = psd_factor(Eigen::MatrixXd(second - mean * mean.transpose()), noise);
  c.cholesky = factor.factor;
  c.deficient = factor.deficient;
  c.rank = factor.rank;
  return c;
}

FeasibleU::FeasibleU(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.cols() < matrix_.rows()) {
    throw InfeasibleU("FeasibleU: need at least as many columns as rows",
                      std::numeric_limits<double>::infinity());
  }
  const double defect = orthonormal_rows_defect(matrix_);
  if (!(defect <= kFeasibilityTolerance)) {
    throw InfeasibleU("FeasibleU: rows are not orthonormal (||U U^T - I||_F = " + std::to_string(defect) + ")",
                      defect);
  }
}

PCExpansion assemble_theorem1(const MomentConstraint& constraint, const BasisSet& basis, const FeasibleU& u) {
  const Eigen::Index n = constraint.dim();
  require_wide_enough(n, basis);
  const Eigen::Index tail = basis.size() - 1;
  if (u.matrix().rows() != n || u.matrix().cols() != tail) {
    throw DimensionMismatch("assemble_theorem1: U must be n x N");
  }
  Eigen::MatrixXd coeffs(n, basis.size());
  coeffs.col(0) = constraint.mean;
  const Eigen::VectorXd inv_sqrt_w1 = basis.norms().tail(tail).cwiseSqrt().cwiseInverse();
  coeffs.rightCols(tail) = constraint.cholesky * u.matrix() * inv_sqrt_w1.asDiagonal();
  return PCExpansion(basis, std::move(coeffs));
}

Eigen::MatrixXd unconstrained_u(const MomentSet& moments, const BasisSet& basis, const ConstrainedOptions& options) {
  require_wide_enough(moments.dim(), basis);
  const Eigen::Index tail = basis.size() - 1;
  if (moments.cross.rows() != moments.dim() || moments.cross.cols() != tail) {
    throw DimensionMismatch("unconstrained_u: cross moment must be n x N");
  }
  const auto constraint = MomentConstraint::from(moments);
  const Eigen::VectorXd inv_sqrt_w1 = basis.norms().tail(tail).cwiseSqrt().cwiseInverse();
  return solve_factor(constraint, moments.cross * inv_sqrt_w1.asDiagonal(), options);
}

PCExpansion solve_constrained_L2(const MomentSet& moments, const BasisSet& basis, const ConstrainedOptions& options) {
  const auto constraint = MomentConstraint::from(moments);
  const Eigen::MatrixXd u_gp = unconstrained_u(moments, basis, options);
  return assemble_theorem1(constraint, basis, project_to_orthonormal_rows(u_gp));
}

PCExpansion solve_constrained_l2(const Eigen::MatrixXd& grid, const MomentSet& moments, const BasisSet& basis,
                                 const VectorFunction& f, const ConstrainedOptions& options,
                                 const Eigen::VectorXd& weights) {
  const Eigen::Index n = moments.dim();
  require_wide_enough(n, basis);
  const Eigen::Index tail = basis.size() - 1;
  const Eigen::Index points = grid.cols();
  if (weights.size() != 0 && weights.size() != points) {
    throw DimensionMismatch("solve_constrained_l2: one weight per grid point");
  }
  if (points < tail) {
    throw IllConditioned("solve_constrained_l2: E2 is singular with fewer than N = " + std::to_string(tail) + " grid points",
                         std::numeric_limits<double>::infinity());
  }

  // Rows scaled by sqrt(w): E2 = A^T A, E1 = A^T Y.
  Eigen::MatrixXd design(points, tail);
  Eigen::MatrixXd centered(points, n);
  for (Eigen::Index i = 0; i < points; ++i) {
    const Eigen::VectorXd node = grid.col(i);
    const Eigen::VectorXd v = f(node);
    if (!v.allFinite()) throw EvaluationError("solve_constrained_l2: non-finite function value", node);
    if (v.size() != n) throw DimensionMismatch("solve_constrained_l2: function output does not match moments");
    const double scale = weights.size() ? std::sqrt(weights(i)) : 1.0;
    design.row(i) = scale * basis.eval(node).tail(tail).transpose();
    centered.row(i) = scale * (v - moments.mean).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double smin = sigma(sigma.size() - 1);
  const double condition = smin > 0.0 ? (sigma(0) / smin) * (sigma(0) / smin)
                                      : std::numeric_limits<double>::infinity();
  if (!(condition <= options.max_condition)) {
    throw IllConditioned("solve_constrained_l2: E2 is singular or ill-conditioned", condition);
  }
  // F1_ls = E1^T E2^{-1}; U_hat = L^{-1} F1_ls W1^{1/2}.
  const Eigen::MatrixXd f1_ls = svd.solve(centered).transpose();
  const auto constraint = MomentConstraint::from(moments);
  const Eigen::VectorXd sqrt_w1 = basis.norms().tail(tail).cwiseSqrt();
  const Eigen::MatrixXd u_hat = solve_factor(constraint, f1_ls * sqrt_w1.asDiagonal(), options);
  return assemble_theorem1(constraint, basis, project_to_orthonormal_rows(u_hat));
}

FeasibleU project_to_orthonormal_rows(const Eigen::MatrixXd& a) {
  return FeasibleU(nearest_orthonormal_rows(a));
}

double gp_cost_gap(const MomentSet& moments, const BasisSet& basis, const FeasibleU& u) {
  const Eigen::Index tail = basis.size() - 1;
  const auto constraint = MomentConstraint::from(moments);
  const Eigen::VectorXd inv_sqrt_w1 = basis.norms().tail(tail).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd diff = constraint.cholesky * u.matrix() - moments.cross * inv_sqrt_w1.asDiagonal();
  return diff.squaredNorm();
}

}  // namespace pce
