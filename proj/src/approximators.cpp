#include "pce/approximators.hpp"

#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/SVD>
#include <json.hpp>

#include "pce/errors.hpp"
#include "pce/quadrature.hpp"

namespace pce {

PCExpansion::PCExpansion(BasisSet basis, Eigen::MatrixXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (coeffs_.cols() != basis_.size()) {
    throw DimensionMismatch("PCExpansion: coefficient columns (" + std::to_string(coeffs_.cols()) +
                            ") must equal basis size (" + std::to_string(basis_.size()) + ")");
  }
}

PCExpansion solve_gp(const ExpectationEngine& engine, const BasisSet& basis, const VectorFunction& f) {
  const NodeSet set = engine.nodes(basis.param());
  Eigen::MatrixXd projection;
  Eigen::VectorXd phi(basis.size());
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    const Eigen::VectorXd v = f(node);
    if (!v.allFinite()) throw EvaluationError("solve_gp: non-finite function value", node);
    if (j == 0) projection = Eigen::MatrixXd::Zero(v.size(), basis.size());
    basis.eval_into(node, phi);
    projection.noalias() += set.weights(j) * v * phi.transpose();
  }
  return PCExpansion(basis, projection * basis.norms().cwiseInverse().asDiagonal());
}

SCInterpolant solve_sc(const Eigen::MatrixXd& nodes, const VectorFunction& f) {
  LagrangeBasis psi(nodes);
  Eigen::MatrixXd values;
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
    const Eigen::VectorXd node = nodes.col(j);
    const Eigen::VectorXd v = f(node);
    if (!v.allFinite()) throw EvaluationError("solve_sc: non-finite function value", node);
    if (j == 0) values.resize(v.size(), nodes.cols());
    values.col(j) = v;
  }
  return SCInterpolant{std::move(psi), std::move(values)};
}

Eigen::MatrixXd uniform_samples(const UniformParameter& param, Eigen::Index count, std::uint64_t seed) {
  const int d = param.dims();
  Eigen::MatrixXd out(d, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (int k = 0; k < d; ++k) {
      const auto& b = param.bounds()[static_cast<std::size_t>(k)];
      out(k, j) = b.lo + (b.hi - b.lo) * counter_uniform(seed, static_cast<std::uint64_t>(j * d + k));
    }
  }
  return out;
}

Eigen::MatrixXd default_sc_nodes(const UniformParameter& param, int order, std::uint64_t seed) {
  if (param.dims() == 1) {
    const auto rule = gauss_legendre<double>(order + 1);
    Eigen::MatrixXd nodes(1, order + 1);
    for (int j = 0; j <= order; ++j) nodes.col(j) = param.from_standard(rule.nodes.segment(j, 1));
    return nodes;
  }
  return uniform_samples(param, static_cast<Eigen::Index>(basis_size(param.dims(), order)), seed);
}

Eigen::MatrixXd default_ls_grid(const BasisSet& basis, std::uint64_t seed) {
  return uniform_samples(basis.param(), 2 * basis.size(), seed);
}

PCExpansion solve_ls(const Eigen::MatrixXd& grid, const BasisSet& basis, const VectorFunction& f,
                     double max_condition) {
  const Eigen::Index points = grid.cols();
  if (points < basis.size()) {
    throw IllConditioned("solve_ls: H2 is singular with fewer than N+1 = " + std::to_string(basis.size()) + " grid points",
                         std::numeric_limits<double>::infinity());
  }
  Eigen::MatrixXd design(points, basis.size());
  Eigen::MatrixXd targets;
  for (Eigen::Index i = 0; i < points; ++i) {
    const Eigen::VectorXd node = grid.col(i);
    design.row(i) = basis.eval(node).transpose();
    const Eigen::VectorXd v = f(node);
    if (!v.allFinite()) throw EvaluationError("solve_ls: non-finite function value", node);
    if (i == 0) targets.resize(points, v.size());
    targets.row(i) = v.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double smin = sigma(sigma.size() - 1);
  const double condition = smin > 0.0 ? (sigma(0) / smin) * (sigma(0) / smin)
                                      : std::numeric_limits<double>::infinity();
  if (!(condition <= max_condition)) {
    throw IllConditioned("solve_ls: normal matrix H2 is singular or ill-conditioned", condition);
  }
  return PCExpansion(basis, svd.solve(targets).transpose());
}

Eigen::VectorXd eval_expansion(const PCExpansion& expansion, const Eigen::Ref<const Eigen::VectorXd>& point) {
  return expansion.coeffs() * expansion.basis().eval(point);
}

Eigen::VectorXd eval_expansion(const SCInterpolant& interpolant, const Eigen::Ref<const Eigen::VectorXd>& point) {
  return interpolant.values * interpolant.basis.eval(point);
}

ExpansionMoments expansion_moments(const PCExpansion& expansion) {
  const Eigen::MatrixXd& f = expansion.coeffs();
  ExpansionMoments m;
  m.mean = f.col(0);
  m.second = f * expansion.basis().norms().asDiagonal() * f.transpose();
  return m;
}

void write_expansion_csv(std::ostream& out, const PCExpansion& expansion) {
  const BasisSet& basis = expansion.basis();
  nlohmann::json header;
  header["format"] = "pce-expansion";
  header["version"] = 1;
  header["order"] = basis.order();
  header["ordering"] = "graded-lex";
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : basis.param().bounds()) bounds.push_back({b.lo, b.hi});
  header["bounds"] = bounds;
  header["indices"] = basis.indices();
  header["rows"] = expansion.dim();
  out << "# " << header.dump() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < expansion.dim(); ++i) {
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", expansion.coeffs()(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

PCExpansion read_expansion_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw Error("read_expansion_csv: missing JSON header line");
  }
  const auto header = nlohmann::json::parse(line.substr(2));
  if (header.value("format", "") != "pce-expansion" || header.value("version", 0) != 1) {
    throw Error("read_expansion_csv: unsupported format or version");
  }
  if (header.value("ordering", "") != "graded-lex") {
    throw Error("read_expansion_csv: unsupported basis ordering");
  }
  std::vector<Interval> bounds;
  for (const auto& b : header.at("bounds")) bounds.push_back(Interval{b.at(0).get<double>(), b.at(1).get<double>()});
  BasisSet basis(UniformParameter(std::move(bounds)), header.at("order").get<int>());
  if (header.contains("indices") && header.at("indices").get<std::vector<MultiIndex>>() != basis.indices()) {
    throw Error("read_expansion_csv: index list does not match graded-lex ordering");
  }
  const auto rows = header.at("rows").get<Eigen::Index>();
  Eigen::MatrixXd coeffs(rows, basis.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw Error("read_expansion_csv: truncated coefficient table");
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= basis.size()) throw Error("read_expansion_csv: too many columns");
      coeffs(i, j++) = std::stod(cell);
    }
    if (j != basis.size()) throw Error("read_expansion_csv: too few columns");
  }
  return PCExpansion(std::move(basis), std::move(coeffs));
}

}  // namespace pce
