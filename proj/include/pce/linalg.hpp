#pragma once

// Dense kernels shared by the constrained solvers and the propagator.
// Everything here is templated on the Eigen expression type so the same code
// runs in double or long double.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "pce/errors.hpp"

namespace pce {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Relative eigenvalue threshold below which covariance directions are treated
// as deterministic.
inline constexpr double kRankTolerance = 1e-12;
// Allowed negative eigenvalue of a covariance, relative to its trace.
inline constexpr double kPsdTolerance = 1e-10;

/// Lower-triangular square root of a symmetric positive semidefinite matrix.
///
/// `factor` satisfies factor * factor^T == input (up to truncation of
/// eigen-directions below `kRankTolerance * trace`). `deficient` holds an
/// orthonormal basis of the truncated directions, one per column.
/// `noise_floor` is the rounding level of the input when it was formed by
/// cancellation (second moment minus mean outer product): eigenvalues within
/// it are treated as zero rather than as negative or significant.
template <typename Scalar>
struct PsdFactor {
  Mat<Scalar> factor;
  Mat<Scalar> deficient;
  Eigen::Index rank = 0;

  bool singular() const { return rank < factor.rows(); }
};

template <typename Derived>
PsdFactor<typename Derived::Scalar> psd_factor(const Eigen::MatrixBase<Derived>& input,
                                               double noise_floor = 0.0) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw DimensionMismatch("psd_factor: matrix is not square");

  const Mat<Scalar> sym = (input + input.transpose()) / Scalar(2);
  const Scalar trace = sym.trace();

  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(sym);
  const Vec<Scalar>& lambda = eig.eigenvalues();
  const Scalar floor = Scalar(noise_floor);
  const Scalar scale = std::max(abs(trace), std::numeric_limits<Scalar>::min());
  if (n > 0 && lambda(0) < -Scalar(kPsdTolerance) * scale - floor) {
    throw NotPositiveSemidefinite("psd_factor: matrix has a negative eigenvalue",
                                  static_cast<double>(lambda(0)));
  }

  const Scalar cutoff = std::max(Scalar(kRankTolerance) * std::max(trace, Scalar(0)), floor);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) > cutoff && lambda(i) > Scalar(0)) ++rank;
  }

  PsdFactor<Scalar> out;
  out.rank = rank;
  // Eigenvalues are ascending: truncated directions come first.
  out.deficient = eig.eigenvectors().leftCols(n - rank);

  if (rank == n) {
    Eigen::LLT<Mat<Scalar>> llt(sym);
    if (llt.info() == Eigen::Success) {
      out.factor = llt.matrixL();
      return out;
    }
  }

  // B B^T = truncated input; QR of B^T gives B^T = Q R, so R^T R = B B^T.
  Mat<Scalar> root(n, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    const Eigen::Index src = n - rank + j;
    root.col(j) = eig.eigenvectors().col(src) * sqrt(lambda(src));
  }
  out.factor = Mat<Scalar>::Zero(n, n);
  if (rank > 0) {
    Eigen::HouseholderQR<Mat<Scalar>> qr(root.transpose());
    const Mat<Scalar> upper = qr.matrixQR().template triangularView<Eigen::Upper>();
    out.factor.leftCols(rank) = upper.topRows(rank).transpose();
    for (Eigen::Index j = 0; j < rank; ++j) {
      if (out.factor(j, j) < Scalar(0)) out.factor.col(j) *= Scalar(-1);
    }
  }
  return out;
}

/// Frobenius distance of U U^T from the identity.
template <typename Derived>
typename Derived::Scalar orthonormal_rows_defect(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  return (u * u.transpose() - Mat<Scalar>::Identity(u.rows(), u.rows())).norm();
}

namespace detail {

// Extends the orthonormal columns of `basis` to `wanted` extra orthonormal
// columns, drawing candidates from the standard basis in order.
template <typename Scalar>
Mat<Scalar> orthonormal_completion(const Mat<Scalar>& basis, Eigen::Index dim,
                                   Eigen::Index wanted) {
  Mat<Scalar> out(dim, wanted);
  Mat<Scalar> span(dim, basis.cols() + wanted);
  span.leftCols(basis.cols()) = basis;
  Eigen::Index have = basis.cols();
  Eigen::Index added = 0;
  for (Eigen::Index e = 0; e < dim && added < wanted; ++e) {
    Vec<Scalar> v = Vec<Scalar>::Unit(dim, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < have; ++k) v -= span.col(k).dot(v) * span.col(k);
    }
    const Scalar norm = v.norm();
    if (norm < Scalar(1e-8)) continue;
    v /= norm;
    span.col(have++) = v;
    out.col(added++) = v;
  }
  return out;
}

}  // namespace detail

/// Nearest matrix with orthonormal rows (polar factor of a wide matrix).
///
/// With A = M1 D M2^T, returns M1 [I 0] M2^T. Directions with a numerically
/// zero singular value are paired deterministically by completing the kept
/// left and right singular vectors against the standard basis in order, so a
/// zero input maps to [I 0].
template <typename Derived>
Mat<typename Derived::Scalar> nearest_orthonormal_rows(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = a.rows();
  const Eigen::Index cols = a.cols();
  if (cols < n) throw DimensionMismatch("nearest_orthonormal_rows: needs cols >= rows");
  if (n == 0) return Mat<Scalar>(0, cols);

  const Mat<Scalar> dense = a;
  Eigen::JacobiSVD<Mat<Scalar>> svd(dense, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const Vec<Scalar>& sigma = svd.singularValues();
  const Scalar tol =
      Scalar(std::max(n, cols)) * std::numeric_limits<Scalar>::epsilon() * sigma(0);
  Eigen::Index rank = 0;
  while (rank < n && sigma(rank) > tol && sigma(rank) > Scalar(0)) ++rank;

  Mat<Scalar> left = svd.matrixU().leftCols(rank);
  Mat<Scalar> right = svd.matrixV().leftCols(rank);
  Mat<Scalar> out = left * right.transpose();
  if (rank < n) {
    const Mat<Scalar> left_rest = detail::orthonormal_completion<Scalar>(left, n, n - rank);
    const Mat<Scalar> right_rest = detail::orthonormal_completion<Scalar>(right, cols, n - rank);
    out += left_rest * right_rest.transpose();
  }
  return out;
}

/// Least-squares transition matrix for x^{j+1} = M x^j over the columns of
/// `states` (dim x (q+1)). Throws IllConditioned when the Gram matrix
/// sum x^j x^j^T has condition number above `max_condition`.
template <typename Derived>
Mat<typename Derived::Scalar> least_squares_transition(const Eigen::MatrixBase<Derived>& states,
                                                       double max_condition) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index dim = states.rows();
  const Eigen::Index q = states.cols() - 1;
  if (q < 1) throw InvalidArgument("least_squares_transition: need at least two states");

  const Mat<Scalar> before = states.leftCols(q);
  const Mat<Scalar> after = states.rightCols(q);
  // cond(Gram) = cond(before)^2; the SVD of the data avoids squaring it.
  Eigen::JacobiSVD<Mat<Scalar>> svd(before.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec<Scalar>& sigma = svd.singularValues();
  const Scalar smin = sigma.size() == dim ? sigma(dim - 1) : Scalar(0);
  const double condition =
      smin > Scalar(0) ? static_cast<double>((sigma(0) / smin) * (sigma(0) / smin))
                       : std::numeric_limits<double>::infinity();
  if (q < dim || !(condition <= max_condition)) {
    throw IllConditioned("least_squares_transition: Gram matrix is rank deficient", condition);
  }
  return svd.solve(after.transpose()).transpose();
}

}  // namespace pce
