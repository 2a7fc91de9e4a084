#include "pce/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "pce/constrained.hpp"
#include "pce/linalg.hpp"
#include "pce/quadrature.hpp"

namespace pce {

Eigen::VectorXd flatten(const Eigen::MatrixXd& coeffs) {
  return Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& x_pc, Eigen::Index state_dim) {
  if (state_dim < 1 || x_pc.size() % state_dim != 0) {
    throw DimensionMismatch("unflatten: length is not a multiple of the state dimension");
  }
  return Eigen::Map<const Eigen::MatrixXd>(x_pc.data(), state_dim, x_pc.size() / state_dim);
}

CoefficientSeries::CoefficientSeries(double step, Eigen::Index state_dim, Eigen::Index basis_size)
    : step_(step), state_dim_(state_dim), basis_size_(basis_size) {
  if (!(step > 0.0)) throw InvalidArgument("CoefficientSeries: step must be positive");
}

void CoefficientSeries::push_back(Eigen::VectorXd state) {
  if (state.size() != length()) throw DimensionMismatch("CoefficientSeries: state length must be n(N+1)");
  states_.push_back(std::move(state));
}

Eigen::VectorXd gp_rhs(const GPSurrogateODE& ode, const Eigen::VectorXd& x_pc) {
  const BasisSet& basis = ode.basis;
  const Eigen::Index n = ode.state_dim;
  if (x_pc.size() != n * basis.size()) throw DimensionMismatch("gp_rhs: x_pc must have length n(N+1)");
  const Eigen::MatrixXd coeffs = unflatten(x_pc, n);
  const NodeSet set = ode.engine.nodes(basis.param());
  Eigen::MatrixXd projection = Eigen::MatrixXd::Zero(n, basis.size());
  Eigen::VectorXd phi(basis.size());
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    basis.eval_into(node, phi);
    const Eigen::VectorXd v = ode.dynamics(coeffs * phi, node);
    if (!v.allFinite()) throw EvaluationError("gp_rhs: non-finite dynamics value", node);
    projection.noalias() += set.weights(j) * v * phi.transpose();
  }
  return flatten(projection * basis.norms().cwiseInverse().asDiagonal());
}

Eigen::MatrixXd linear_gp_matrix(const BasisSet& basis, const ExpectationEngine& engine,
                                 const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& system) {
  const NodeSet set = engine.nodes(basis.param());
  const Eigen::Index nb = basis.size();
  Eigen::MatrixXd out;
  Eigen::Index n = 0;
  Eigen::VectorXd phi(nb);
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    const Eigen::MatrixXd a = system(node);
    if (j == 0) {
      n = a.rows();
      out = Eigen::MatrixXd::Zero(n * nb, n * nb);
    }
    basis.eval_into(node, phi);
    // Block (r, c) of (Phi Phi^T) kron A is phi_r phi_c A.
    for (Eigen::Index r = 0; r < nb; ++r) {
      for (Eigen::Index c = 0; c < nb; ++c) {
        out.block(r * n, c * n, n, n) += set.weights(j) * phi(r) * phi(c) * a;
      }
    }
  }
  for (Eigen::Index r = 0; r < nb; ++r) out.middleRows(r * n, n) /= basis.norms()(r);
  return out;
}

Eigen::MatrixXd fit_transition(const std::vector<Eigen::VectorXd>& window, double max_condition) {
  if (window.size() < 2) throw InvalidArgument("fit_transition: need at least two states");
  Eigen::MatrixXd states(window.front().size(), static_cast<Eigen::Index>(window.size()));
  for (std::size_t j = 0; j < window.size(); ++j) {
    if (window[j].size() != states.rows()) throw DimensionMismatch("fit_transition: states differ in length");
    states.col(static_cast<Eigen::Index>(j)) = window[j];
  }
  return least_squares_transition(states, max_condition);
}

Eigen::VectorXd reconstruct_cpc(const ReferenceStatsProvider& provider, const BasisSet& basis, std::size_t k) {
  const ReferenceStats ref = provider(k);
  const MomentSet moments = MomentSet::from(ref.mean, ref.second, ref.cross);
  return flatten(solve_constrained_L2(moments, basis).coeffs());
}

Algorithm1Result run_algorithm1(const GPSurrogateODE& ode, const ReferenceStatsProvider& provider,
                                const BasisSet& basis, std::size_t q, std::size_t steps, double h,
                                const Algorithm1Options& options) {
  const Eigen::Index n = ode.state_dim;
  const auto length = static_cast<std::size_t>(n * basis.size());
  if (q < length) {
    throw InvalidArgument("run_algorithm1: window q = " + std::to_string(q) + " is below n(N+1) = " +
                          std::to_string(length));
  }
  if (steps <= q) throw InvalidArgument("run_algorithm1: need more steps than the window length");
  if (!(ode.basis == basis)) throw InvalidArgument("run_algorithm1: surrogate and basis disagree");

  Algorithm1Result out{CoefficientSeries(h, n, basis.size()), CoefficientSeries(h, n, basis.size()),
                       CoefficientSeries(h, n, basis.size()), {}, {}};
  auto rhs = [&ode](const Eigen::VectorXd& x) { return gp_rhs(ode, x); };

  for (std::size_t k = 0; k <= steps; ++k) out.reference.push_back(reconstruct_cpc(provider, basis, k));

  out.gp.push_back(out.reference[0]);
  for (std::size_t k = 0; k < steps; ++k) out.gp.push_back(rk4_step(rhs, out.gp[k], h));

  out.predicted.push_back(out.reference[0]);
  for (std::size_t k = 0; k < steps; ++k) {
    if (k < q) {
      out.predicted.push_back(out.gp[k + 1]);
      continue;
    }
    const Eigen::VectorXd& start = options.free_running ? out.predicted[k] : out.reference[k];
    std::vector<Eigen::VectorXd> window(out.reference.states().begin() + static_cast<std::ptrdiff_t>(k - q),
                                        out.reference.states().begin() + static_cast<std::ptrdiff_t>(k + 1));
    try {
      const Eigen::MatrixXd m = fit_transition(window, options.max_condition);
      out.predicted.push_back(m * start);
    } catch (const IllConditioned& e) {
      out.fallback_steps.push_back(k);
      out.diagnostics.push_back("step " + std::to_string(k) + ": GP fallback, Gram condition " +
                                std::to_string(e.condition()));
      out.predicted.push_back(rk4_step(rhs, start, h));
    }
  }
  return out;
}

StateMoments state_moments(const BasisSet& basis, const Eigen::VectorXd& x_pc, Eigen::Index state_dim) {
  const PCExpansion expansion(basis, unflatten(x_pc, state_dim));
  const ExpansionMoments m = expansion_moments(expansion);
  return StateMoments{m.mean, m.second - m.mean * m.mean.transpose()};
}

LinearDecayReference::LinearDecayReference(BasisSet basis, double step, int quadrature_points)
    : basis_(std::move(basis)), step_(step) {
  if (basis_.dims() != 1) throw InvalidArgument("LinearDecayReference: scalar decay rate expected");
  nodes_ = ExpectationEngine::quadrature(quadrature_points).nodes(basis_.param());
  const Eigen::Index tail = basis_.size() - 1;
  phi1_.resize(tail, nodes_.weights.size());
  for (Eigen::Index j = 0; j < nodes_.weights.size(); ++j) {
    phi1_.col(j) = basis_.eval(nodes_.points.col(j)).tail(tail);
  }
}

ReferenceStats LinearDecayReference::at_time(double t) const {
  const auto& b = basis_.param().bounds().front();
  const double width = b.hi - b.lo;
  // E[exp(-a s)] for a ~ U[lo, hi], written with expm1 to stay accurate near s = 0.
  auto laplace = [&](double s) {
    if (s == 0.0) return 1.0;
    return std::exp(-b.lo * s) * (-std::expm1(-width * s)) / (width * s);
  };
  ReferenceStats out;
  out.mean = Eigen::VectorXd::Constant(1, laplace(t));
  out.second = Eigen::MatrixXd::Constant(1, 1, laplace(2.0 * t));
  out.cross = Eigen::MatrixXd::Zero(1, phi1_.rows());
  for (Eigen::Index j = 0; j < nodes_.weights.size(); ++j) {
    out.cross.row(0) += nodes_.weights(j) * std::exp(-nodes_.points(0, j) * t) * phi1_.col(j).transpose();
  }
  return out;
}

ReferenceStats LinearDecayReference::operator()(std::size_t k) const {
  return at_time(step_ * static_cast<double>(k));
}

MonteCarloReference::MonteCarloReference(const BasisSet& basis, const BatchDynamics& dynamics,
                                         const Eigen::VectorXd& initial, const Settings& settings)
    : basis_(basis) {
  if (settings.paths < 2) throw InvalidArgument("MonteCarloReference: need at least two paths");
  const int d = basis.dims();
  const auto paths = static_cast<Eigen::Index>(settings.paths);
  const Eigen::Index tail = basis.size() - 1;

  Eigen::MatrixXd deltas(d, paths);
  Eigen::MatrixXd phi1(tail, paths);
  for (Eigen::Index p = 0; p < paths; ++p) {
    for (int k = 0; k < d; ++k) {
      const auto& b = basis.param().bounds()[static_cast<std::size_t>(k)];
      deltas(k, p) = b.lo + (b.hi - b.lo) * counter_uniform(settings.seed, static_cast<std::uint64_t>(p * d + k));
    }
    phi1.col(p) = basis.eval(deltas.col(p)).tail(tail);
  }

  Eigen::MatrixXd states = initial.replicate(1, paths);
  auto rhs = [&](const Eigen::MatrixXd& x) { return dynamics(x, deltas); };
  const double count = static_cast<double>(paths);
  stats_.reserve(settings.steps + 1);
  for (std::size_t k = 0;; ++k) {
    ReferenceStats s;
    s.mean = states.rowwise().sum() / count;
    s.second = states * states.transpose() / count;
    s.cross = states * phi1.transpose() / count;
    const Eigen::ArrayXd m = s.mean.array();
    const Eigen::ArrayXXd x = states.array();
    const Eigen::ArrayXd centered2 = (x.colwise() - m).square().rowwise().sum() / count;
    const Eigen::ArrayXd centered4 = (x.colwise() - m).square().square().rowwise().sum() / count;
    mean_se_.push_back((centered2 / count).sqrt().matrix());
    var_se_.push_back(((centered4 - centered2.square()).max(0.0) / count).sqrt().matrix());
    stats_.push_back(std::move(s));
    if (k == settings.steps) break;
    states = rk4_step(rhs, states, settings.step);
  }
}

ReferenceStatsProvider MonteCarloReference::provider(const BasisSet& basis) const {
  if (!(basis.param() == basis_.param()) || basis.size() > basis_.size() ||
      !std::equal(basis.indices().begin(), basis.indices().end(), basis_.indices().begin())) {
    throw InvalidArgument("MonteCarloReference: basis is not a prefix of the ensemble basis");
  }
  const Eigen::Index tail = basis.size() - 1;
  return [this, tail](std::size_t k) {
    const ReferenceStats& full = stats_.at(k);
    return ReferenceStats{full.mean, full.second, full.cross.leftCols(tail)};
  };
}

}  // namespace pce
