#include "pce/expectation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "pce/errors.hpp"
#include "pce/quadrature.hpp"

namespace pce {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_finite(const Eigen::VectorXd& value, const Eigen::VectorXd& node) {
  if (!value.allFinite()) {
    std::ostringstream os;
    os << "non-finite function value at node [" << node.transpose() << "]";
    throw EvaluationError(os.str(), node);
  }
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ counter);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

ExpectationEngine ExpectationEngine::quadrature(int points_per_dim) {
  if (points_per_dim < 1) throw InvalidArgument("quadrature engine: points_per_dim must be >= 1");
  return ExpectationEngine(Quadrature{points_per_dim});
}

ExpectationEngine ExpectationEngine::monte_carlo(std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("monte-carlo engine: samples must be >= 1");
  return ExpectationEngine(MonteCarlo{samples, seed});
}

ExpectationEngine ExpectationEngine::weighted_grid(Eigen::MatrixXd nodes, Eigen::VectorXd weights) {
  if (nodes.cols() != weights.size() || weights.size() == 0) {
    throw InvalidArgument("weighted-grid engine: need one positive weight per node");
  }
  if ((weights.array() <= 0.0).any()) throw InvalidArgument("weighted-grid engine: weights must be positive");
  if (std::abs(weights.sum() - 1.0) > kWeightSumTolerance) {
    throw InvalidArgument("weighted-grid engine: weights must sum to 1");
  }
  return ExpectationEngine(WeightedGrid{std::move(nodes), std::move(weights)});
}

NodeSet ExpectationEngine::nodes(const UniformParameter& param) const {
  const int d = param.dims();
  NodeSet out;
  if (const auto* q = std::get_if<Quadrature>(&kind_)) {
    const auto rule = gauss_legendre<double>(q->points_per_dim);
    const Eigen::Index m = q->points_per_dim;
    Eigen::Index total = 1;
    for (int k = 0; k < d; ++k) total *= m;
    out.points.resize(d, total);
    out.weights.resize(total);
    std::vector<Eigen::Index> digit(static_cast<std::size_t>(d), 0);
    Eigen::VectorXd xi(d);
    for (Eigen::Index j = 0; j < total; ++j) {
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        xi(k) = rule.nodes(digit[static_cast<std::size_t>(k)]);
        w *= rule.weights(digit[static_cast<std::size_t>(k)]);
      }
      out.points.col(j) = param.from_standard(xi);
      out.weights(j) = w;
      for (int k = 0; k < d; ++k) {
        auto& dk = digit[static_cast<std::size_t>(k)];
        if (++dk < m) break;
        dk = 0;
      }
    }
  } else if (const auto* mc = std::get_if<MonteCarlo>(&kind_)) {
    const auto total = static_cast<Eigen::Index>(mc->samples);
    out.points.resize(d, total);
    out.weights = Eigen::VectorXd::Constant(total, 1.0 / static_cast<double>(total));
    for (Eigen::Index j = 0; j < total; ++j) {
      for (int k = 0; k < d; ++k) {
        const auto& b = param.bounds()[static_cast<std::size_t>(k)];
        const double u = counter_uniform(mc->seed, static_cast<std::uint64_t>(j * d + k));
        out.points(k, j) = b.lo + (b.hi - b.lo) * u;
      }
    }
  } else {
    const auto& grid = std::get<WeightedGrid>(kind_);
    if (grid.nodes.rows() != d) throw DimensionMismatch("weighted-grid engine: node dimension");
    out.points = grid.nodes;
    out.weights = grid.weights;
  }
  return out;
}

Eigen::VectorXd expect(const ExpectationEngine& engine, const UniformParameter& param,
                       const VectorFunction& g) {
  return expect_with_error(engine, param, g).value;
}

Estimate expect_with_error(const ExpectationEngine& engine, const UniformParameter& param,
                           const VectorFunction& g) {
  const NodeSet set = engine.nodes(param);
  Estimate est;
  Eigen::VectorXd sq;
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    const Eigen::VectorXd v = g(node);
    check_finite(v, node);
    if (j == 0) {
      est.value = Eigen::VectorXd::Zero(v.size());
      sq = Eigen::VectorXd::Zero(v.size());
    } else if (v.size() != est.value.size()) {
      throw DimensionMismatch("expect: function output size changed between nodes");
    }
    est.value += set.weights(j) * v;
    sq += set.weights(j) * v.cwiseAbs2();
  }
  est.std_error = Eigen::VectorXd::Zero(est.value.size());
  if (engine.is_monte_carlo() && set.weights.size() > 1) {
    const double count = static_cast<double>(set.weights.size());
    const Eigen::VectorXd var = (sq - est.value.cwiseAbs2()).cwiseMax(0.0) * count / (count - 1.0);
    est.std_error = (var / count).cwiseSqrt();
  }
  return est;
}

MomentSet MomentSet::from(Eigen::VectorXd mean, Eigen::MatrixXd second, Eigen::MatrixXd cross) {
  MomentSet m;
  m.covariance = second - mean * mean.transpose();
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  m.mean = std::move(mean);
  m.second = std::move(second);
  m.cross = std::move(cross);
  return m;
}

MomentSet moments_of(const ExpectationEngine& engine, const UniformParameter& param,
                     const BasisSet& basis, const VectorFunction& f) {
  if (basis.dims() != param.dims()) {
    throw DimensionMismatch("moments_of: basis and parameter disagree on dimension");
  }
  const NodeSet set = engine.nodes(param);
  const Eigen::Index nb = basis.size();
  Eigen::VectorXd mean;
  Eigen::MatrixXd second, cross;
  Eigen::VectorXd phi(nb);
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    const Eigen::VectorXd v = f(node);
    check_finite(v, node);
    if (j == 0) {
      mean = Eigen::VectorXd::Zero(v.size());
      second = Eigen::MatrixXd::Zero(v.size(), v.size());
      cross = Eigen::MatrixXd::Zero(v.size(), nb - 1);
    }
    basis.eval_into(node, phi);
    const double w = set.weights(j);
    mean += w * v;
    second.noalias() += w * v * v.transpose();
    if (nb > 1) cross.noalias() += w * v * phi.tail(nb - 1).transpose();
  }
  second = 0.5 * (second + second.transpose()).eval();
  return MomentSet::from(std::move(mean), std::move(second), std::move(cross));
}

ExpectationEngine load_weighted_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_weighted_grid_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error("load_weighted_grid_csv: non-numeric row: " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error("load_weighted_grid_csv: ragged row: " + line);
    }
    if (row.size() < 2) throw Error("load_weighted_grid_csv: need at least one coordinate and a weight");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("load_weighted_grid_csv: no rows in " + path);
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Eigen::MatrixXd nodes(d, static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (Eigen::Index k = 0; k < d; ++k) nodes(k, static_cast<Eigen::Index>(j)) = rows[j][static_cast<std::size_t>(k)];
    weights(static_cast<Eigen::Index>(j)) = rows[j].back();
  }
  return ExpectationEngine::weighted_grid(std::move(nodes), std::move(weights));
}

}  // namespace pce
