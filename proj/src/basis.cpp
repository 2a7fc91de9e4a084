#include "pce/basis.hpp"

#include <algorithm>
#include <string>

#include "pce/errors.hpp"
#include "pce/quadrature.hpp"

namespace pce {

UniformParameter::UniformParameter(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw InvalidArgument("UniformParameter: need at least one dimension");
  for (const auto& b : bounds_) {
    if (!(b.hi > b.lo)) throw InvalidArgument("UniformParameter: interval must have lo < hi");
  }
}

UniformParameter UniformParameter::standard(int dims) {
  if (dims < 1) throw InvalidArgument("UniformParameter: need at least one dimension");
  return UniformParameter(std::vector<Interval>(static_cast<std::size_t>(dims), Interval{}));
}

Eigen::VectorXd UniformParameter::to_standard(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  if (point.size() != dims()) throw DimensionMismatch("UniformParameter: point dimension");
  Eigen::VectorXd xi(point.size());
  for (int k = 0; k < dims(); ++k) {
    const auto& b = bounds_[static_cast<std::size_t>(k)];
    xi(k) = (2.0 * point(k) - b.lo - b.hi) / (b.hi - b.lo);
  }
  return xi;
}

Eigen::VectorXd UniformParameter::from_standard(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  if (xi.size() != dims()) throw DimensionMismatch("UniformParameter: point dimension");
  Eigen::VectorXd x(xi.size());
  for (int k = 0; k < dims(); ++k) {
    const auto& b = bounds_[static_cast<std::size_t>(k)];
    x(k) = 0.5 * (b.lo + b.hi) + 0.5 * (b.hi - b.lo) * xi(k);
  }
  return x;
}

bool UniformParameter::operator==(const UniformParameter& other) const {
  return std::equal(bounds_.begin(), bounds_.end(), other.bounds_.begin(), other.bounds_.end(),
                    [](const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; });
}

std::size_t basis_size(int dims, int order) {
  // C(d + k, k) computed incrementally; exact in integers at every step.
  std::size_t n = 1;
  for (int i = 1; i <= order; ++i) n = n * static_cast<std::size_t>(dims + i) / static_cast<std::size_t>(i);
  return n;
}

namespace {

void compositions(int remaining, int slot, MultiIndex& current, std::vector<MultiIndex>& out) {
  const int dims = static_cast<int>(current.size());
  if (slot == dims - 1) {
    current[static_cast<std::size_t>(slot)] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(slot)] = e;
    compositions(remaining - e, slot + 1, current, out);
  }
}

}  // namespace

std::vector<MultiIndex> total_degree_indices(int dims, int order) {
  if (dims < 1) throw InvalidArgument("total_degree_indices: dims must be positive");
  if (order < 0) throw InvalidArgument("total_degree_indices: order must be non-negative");
  std::vector<MultiIndex> out;
  out.reserve(basis_size(dims, order));
  MultiIndex current(static_cast<std::size_t>(dims), 0);
  for (int degree = 0; degree <= order; ++degree) compositions(degree, 0, current, out);
  return out;
}

BasisSet::BasisSet(UniformParameter param, int order)
    : param_(std::move(param)), order_(order), indices_(total_degree_indices(param_.dims(), order)) {
  norms_.resize(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    double norm = 1.0;
    for (int e : indices_[static_cast<std::size_t>(i)]) norm /= (2.0 * e + 1.0);
    norms_(i) = norm;
  }
}

void BasisSet::eval_into(const Eigen::Ref<const Eigen::VectorXd>& point,
                         Eigen::Ref<Eigen::VectorXd> out) const {
  if (point.size() != dims()) {
    throw DimensionMismatch("eval_basis: point has dimension " + std::to_string(point.size()) +
                            ", basis expects " + std::to_string(dims()));
  }
  if (out.size() != size()) throw DimensionMismatch("eval_basis: output size");
  const Eigen::VectorXd xi = param_.to_standard(point);
  Eigen::MatrixXd table(order_ + 1, dims());
  for (int k = 0; k < dims(); ++k) legendre_values(xi(k), order_, table.col(k).data());
  for (Eigen::Index i = 0; i < size(); ++i) {
    const auto& alpha = indices_[static_cast<std::size_t>(i)];
    double v = 1.0;
    for (int k = 0; k < dims(); ++k) v *= table(alpha[static_cast<std::size_t>(k)], k);
    out(i) = v;
  }
}

Eigen::VectorXd BasisSet::eval(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  Eigen::VectorXd out(size());
  eval_into(point, out);
  return out;
}

bool BasisSet::operator==(const BasisSet& other) const {
  return order_ == other.order_ && param_ == other.param_;
}

BasisSet build_basis(const UniformParameter& param, int order) {
  if (order < 0) throw InvalidArgument("build_basis: order must be non-negative");
  return BasisSet(param, order);
}

Eigen::VectorXd eval_basis(const BasisSet& basis, const Eigen::Ref<const Eigen::VectorXd>& point) {
  return basis.eval(point);
}

LagrangeBasis::LagrangeBasis(Eigen::MatrixXd nodes) : nodes_(std::move(nodes)) {
  if (nodes_.cols() < 1 || nodes_.rows() < 1) throw InvalidArgument("lagrange_basis: empty node set");
  const Eigen::Index count = nodes_.cols();
  denominators_.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    double denom = 1.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      if (j == i) continue;
      for (Eigen::Index k = 0; k < nodes_.rows(); ++k) {
        const double diff = nodes_(k, i) - nodes_(k, j);
        if (diff == 0.0) {
          throw InvalidArgument("lagrange_basis: nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide in coordinate " + std::to_string(k));
        }
        denom *= diff;
      }
    }
    denominators_(i) = denom;
  }
}

Eigen::VectorXd LagrangeBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  if (point.size() != nodes_.rows()) throw DimensionMismatch("LagrangeBasis: point dimension");
  const Eigen::Index count = nodes_.cols();
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    double num = 1.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      if (j == i) continue;
      for (Eigen::Index k = 0; k < nodes_.rows(); ++k) num *= point(k) - nodes_(k, j);
    }
    out(i) = num / denominators_(i);
  }
  return out;
}

LagrangeBasis lagrange_basis(Eigen::MatrixXd nodes) { return LagrangeBasis(std::move(nodes)); }

}  // namespace pce
