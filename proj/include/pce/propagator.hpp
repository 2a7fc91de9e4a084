#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pce/approximators.hpp"
#include "pce/basis.hpp"
#include "pce/errors.hpp"
#include "pce/expectation.hpp"

namespace pce {

/// vec(X) for the n x (N+1) coefficient matrix X (column-major).
Eigen::VectorXd flatten(const Eigen::MatrixXd& coeffs);
Eigen::MatrixXd unflatten(const Eigen::VectorXd& x_pc, Eigen::Index state_dim);

/// Time-indexed flattened PC coefficients x_pc^k, k = 0, 1, ...
class CoefficientSeries {
 public:
  CoefficientSeries(double step, Eigen::Index state_dim, Eigen::Index basis_size);

  void push_back(Eigen::VectorXd state);
  std::size_t size() const { return states_.size(); }
  const Eigen::VectorXd& operator[](std::size_t k) const { return states_[k]; }
  Eigen::VectorXd& operator[](std::size_t k) { return states_[k]; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }

  double step() const { return step_; }
  double time(std::size_t k) const { return step_ * static_cast<double>(k); }
  Eigen::Index state_dim() const { return state_dim_; }
  Eigen::Index length() const { return state_dim_ * basis_size_; }

 private:
  double step_;
  Eigen::Index state_dim_;
  Eigen::Index basis_size_;
  std::vector<Eigen::VectorXd> states_;
};

/// Reference mean, second moment and R = E[x Phi_1^T] of the true state at step k.
struct ReferenceStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;
  Eigen::MatrixXd cross;
};
using ReferenceStatsProvider = std::function<ReferenceStats(std::size_t k)>;

/// Right side f(x, Delta) of dx/dt = f(x, Delta).
using Dynamics = std::function<Eigen::VectorXd(const Eigen::VectorXd& state, const Eigen::VectorXd& delta)>;

/// Galerkin-projected coefficient dynamics:
///   dx_pc/dt = (W kron I_n)^{-1} E[(Phi kron I_n) f((Phi^T kron I_n) x_pc, Delta)].
struct GPSurrogateODE {
  BasisSet basis;
  Eigen::Index state_dim;
  Dynamics dynamics;
  ExpectationEngine engine;
};

Eigen::VectorXd gp_rhs(const GPSurrogateODE& ode, const Eigen::VectorXd& x_pc);

/// Constant system matrix (W kron I_n)^{-1} E[(Phi Phi^T) kron A(Delta)] for
/// linear dynamics dx/dt = A(Delta) x.
Eigen::MatrixXd linear_gp_matrix(const BasisSet& basis, const ExpectationEngine& engine,
                                 const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& system);

/// Classical four-stage Runge-Kutta step. Works on vectors and on matrices
/// whose columns are independent states.
template <typename Rhs, typename Derived>
typename Derived::PlainObject rk4_step(Rhs&& rhs, const Eigen::MatrixBase<Derived>& x, double h) {
  using Plain = typename Derived::PlainObject;
  if (!(h > 0.0)) throw InvalidArgument("rk4_step: step must be positive");
  auto checked = [](Plain v, int stage) {
    if (!v.allFinite()) throw NonFiniteStage("rk4_step: non-finite value in stage " + std::to_string(stage), stage);
    return v;
  };
  const Plain x0 = x;
  const Plain k1 = checked(rhs(x0), 1);
  const Plain k2 = checked(rhs(Plain(x0 + 0.5 * h * k1)), 2);
  const Plain k3 = checked(rhs(Plain(x0 + 0.5 * h * k2)), 3);
  const Plain k4 = checked(rhs(Plain(x0 + h * k3)), 4);
  return x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// l2-optimal M with x^{j+1} ~ M x^j over a window of q+1 states.
/// Throws IllConditioned when q < dim or cond(sum x^j x^j^T) > max_condition.
Eigen::MatrixXd fit_transition(const std::vector<Eigen::VectorXd>& window, double max_condition = kMaxCondition);

/// Flattened constrained-L2 coefficients whose moments equal the reference at k.
Eigen::VectorXd reconstruct_cpc(const ReferenceStatsProvider& provider, const BasisSet& basis, std::size_t k);

struct Algorithm1Options {
  // Predict from the previous prediction instead of the reference-reconstructed
  // coefficients once the window is full.
  bool free_running = false;
  double max_condition = kMaxCondition;
};

struct Algorithm1Result {
  CoefficientSeries predicted;  // x_pc^k; GP warm-up for k <= q, then M^{k-1} x_cpc^{k-1}
  CoefficientSeries reference;  // x_cpc^k
  CoefficientSeries gp;         // pure GP surrogate trajectory from x_cpc^0
  std::vector<std::size_t> fallback_steps;
  std::vector<std::string> diagnostics;
};

/// Linear propagator: GP warm-up for k < q, then x_pc^{k+1} = M^k x_cpc^k
/// with M^k fitted on x_cpc^{k-q}..x_cpc^k. A rank-deficient window falls
/// back to one GP step from x_cpc^k and is recorded.
Algorithm1Result run_algorithm1(const GPSurrogateODE& ode, const ReferenceStatsProvider& provider,
                                const BasisSet& basis, std::size_t q, std::size_t steps, double h,
                                const Algorithm1Options& options = {});

/// Mean and covariance of the state represented by x_pc.
struct StateMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
StateMoments state_moments(const BasisSet& basis, const Eigen::VectorXd& x_pc, Eigen::Index state_dim);

/// Closed-form reference for dx/dt = -a x, x(0) = 1, a ~ U[lo, hi]: mean and
/// second moment analytically, R(t) = E[exp(-a t) Phi_1(a)] by Gauss-Legendre.
class LinearDecayReference {
 public:
  LinearDecayReference(BasisSet basis, double step, int quadrature_points = 64);
  ReferenceStats operator()(std::size_t k) const;
  ReferenceStats at_time(double t) const;

 private:
  BasisSet basis_;
  double step_;
  NodeSet nodes_;
  Eigen::MatrixXd phi1_;  // N x nodes
};

/// Batched right side: column j of `states` evolves under parameter column j.
using BatchDynamics = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& states, const Eigen::MatrixXd& deltas)>;

/// Seeded Monte Carlo ensemble integrated with RK4, accumulating per-step
/// mean, second moment, cross moment against a basis and the fourth central
/// moment needed for standard errors. Paths are summed in index order.
class MonteCarloReference {
 public:
  struct Settings {
    std::size_t paths = 100000;
    std::uint64_t seed = 0;
    double step = 0.01;
    std::size_t steps = 1000;
  };

  MonteCarloReference(const BasisSet& basis, const BatchDynamics& dynamics, const Eigen::VectorXd& initial,
                      const Settings& settings);

  /// Provider for `basis`, whose graded-lex indices must be a prefix of the
  /// basis used to build the ensemble.
  ReferenceStatsProvider provider(const BasisSet& basis) const;

  const ReferenceStats& stats(std::size_t k) const { return stats_[k]; }
  /// Standard errors of the per-component mean and variance estimates at step k.
  const Eigen::VectorXd& mean_std_error(std::size_t k) const { return mean_se_[k]; }
  const Eigen::VectorXd& variance_std_error(std::size_t k) const { return var_se_[k]; }
  std::size_t steps() const { return stats_.size() - 1; }

 private:
  BasisSet basis_;
  std::vector<ReferenceStats> stats_;
  std::vector<Eigen::VectorXd> mean_se_;
  std::vector<Eigen::VectorXd> var_se_;
};

}  // namespace pce
