#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pce {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

/// d-dimensional random vector with independent uniform components.
class UniformParameter {
 public:
  explicit UniformParameter(std::vector<Interval> bounds);

  /// Uniform on [-1, 1]^dims.
  static UniformParameter standard(int dims);

  int dims() const { return static_cast<int>(bounds_.size()); }
  const std::vector<Interval>& bounds() const { return bounds_; }

  /// Affine map from the box to [-1, 1]^d and back.
  Eigen::VectorXd to_standard(const Eigen::Ref<const Eigen::VectorXd>& point) const;
  Eigen::VectorXd from_standard(const Eigen::Ref<const Eigen::VectorXd>& xi) const;

  bool operator==(const UniformParameter& other) const;

 private:
  std::vector<Interval> bounds_;
};

using MultiIndex = std::vector<int>;

/// Number of d-variate polynomials of total degree <= order: (d+order)!/(d! order!).
std::size_t basis_size(int dims, int order);

/// Total-degree multi-indices in graded lexicographic order: by total degree,
/// then lexicographically descending in the exponents, so (1,0) precedes (0,1).
/// Lower orders form a prefix of higher ones.
std::vector<MultiIndex> total_degree_indices(int dims, int order);

/// Tensor Legendre basis orthogonal under the uniform density of `param`.
///
/// phi_i(x) = prod_k P_{alpha_ik}(xi_k) where xi is x mapped to [-1, 1]^d.
/// norms() holds E[phi_i^2] = prod_k 1/(2 alpha_ik + 1), the diagonal of W.
class BasisSet {
 public:
  BasisSet(UniformParameter param, int order);

  const UniformParameter& param() const { return param_; }
  int dims() const { return param_.dims(); }
  int order() const { return order_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const Eigen::VectorXd& norms() const { return norms_; }

  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& point) const;
  void eval_into(const Eigen::Ref<const Eigen::VectorXd>& point, Eigen::Ref<Eigen::VectorXd> out) const;

  bool operator==(const BasisSet& other) const;

 private:
  UniformParameter param_;
  int order_;
  std::vector<MultiIndex> indices_;
  Eigen::VectorXd norms_;
};

BasisSet build_basis(const UniformParameter& param, int order);

/// Phi(point); throws DimensionMismatch if point.size() != basis.dims().
Eigen::VectorXd eval_basis(const BasisSet& basis, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Lagrange interpolation basis on a node set (one node per column).
///
/// psi_i(x) = prod_{j != i} prod_k (x_k - x_kj) / (x_ki - x_kj), which needs the
/// nodes to be distinct in every coordinate.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(Eigen::MatrixXd nodes);

  int dims() const { return static_cast<int>(nodes_.rows()); }
  Eigen::Index size() const { return nodes_.cols(); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }

  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& point) const;

 private:
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd denominators_;
};

LagrangeBasis lagrange_basis(Eigen::MatrixXd nodes);

}  // namespace pce
