#include "pce/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "pce/approximators.hpp"
#include "pce/basis.hpp"
#include "pce/candidates.hpp"
#include "pce/constrained.hpp"
#include "pce/errors.hpp"
#include "pce/expectation.hpp"
#include "pce/linalg.hpp"
#include "pce/propagator.hpp"

namespace pce {

namespace {

class Suite {
 public:
  Suite(std::string name, std::string module, double tolerance) {
    r_.name = std::move(name);
    r_.module = std::move(module);
    r_.tolerance = tolerance;
  }
  // Records an observation against the suite tolerance.
  void check(double error) { check(error, r_.tolerance); }
  void check(double error, double tolerance) {
    if (std::isnan(error) || error > tolerance) r_.passed = false;
    if (std::isnan(error) || error > r_.max_error) r_.max_error = error;
  }
  void fail(const std::string& why) {
    r_.passed = false;
    r_.detail = why;
  }
  SuiteResult result() const { return r_; }

 private:
  SuiteResult r_;
};

using Rng = std::mt19937_64;

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  }
  return m;
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// f(x) = C Phi_p(x) + g(x) elementwise, with C random and g a fixed smooth
// nonlinearity so the function is not in the span of any finite basis.
VectorFunction random_function(Rng& rng, const BasisSet& rich, Eigen::Index n, bool smooth_tail) {
  const Eigen::MatrixXd c = gaussian(rng, n, rich.size());
  return [c, rich, smooth_tail](const Eigen::VectorXd& x) {
    Eigen::VectorXd v = c * rich.eval(x);
    if (smooth_tail) v.array() += 0.3 * (x.array().sum() * Eigen::ArrayXd::LinSpaced(v.size(), 1.0, 2.0)).sin();
    return v;
  };
}

// E[||f - F Phi||^2] under a node set.
double l2_cost(const NodeSet& set, const BasisSet& basis, const VectorFunction& f, const Eigen::MatrixXd& coeffs) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd x = set.points.col(j);
    acc += set.weights(j) * (f(x) - coeffs * basis.eval(x)).squaredNorm();
  }
  return acc;
}

FeasibleU random_feasible(Rng& rng, Eigen::Index n, Eigen::Index cols) {
  return project_to_orthonormal_rows(gaussian(rng, n, cols));
}

struct Problem {
  BasisSet basis;
  VectorFunction f;
  MomentSet moments;
  NodeSet nodes;
};

// Random n in {1,2,3}, N in {n..n+4} via d = 1 and order N.
Problem random_problem(Rng& rng) {
  const int n = uniform_int(rng, 1, 3);
  const int order = uniform_int(rng, n, n + 4);
  BasisSet basis = build_basis(UniformParameter::standard(1), order);
  const BasisSet rich = build_basis(UniformParameter::standard(1), order + 2);
  VectorFunction f = random_function(rng, rich, n, true);
  const auto engine = ExpectationEngine::quadrature(64);
  MomentSet moments = moments_of(engine, basis.param(), basis, f);
  return Problem{basis, f, moments, engine.nodes(basis.param())};
}

double relative(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

template <typename Body>
SuiteResult run_suite(const std::string& name, const std::string& module, double tolerance, Body&& body) {
  Suite s(name, module, tolerance);
  try {
    body(s);
  } catch (const std::exception& e) {
    s.fail(std::string("exception: ") + e.what());
  }
  return s.result();
}

// ---------------------------------------------------------------- basis

SuiteResult basis_orthogonality() {
  return run_suite("basis-orthogonality", "basis", 1e-12, [](Suite& s) {
    for (int d = 1; d <= 3; ++d) {
      const BasisSet basis = build_basis(UniformParameter::standard(d), d == 1 ? 10 : 4);
      const NodeSet set = ExpectationEngine::quadrature(basis.order() + 1).nodes(basis.param());
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
      for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
        const Eigen::VectorXd phi = basis.eval(set.points.col(j));
        gram.noalias() += set.weights(j) * phi * phi.transpose();
      }
      for (Eigen::Index i = 0; i < basis.size(); ++i) {
        for (Eigen::Index k = 0; k < basis.size(); ++k) {
          if (i == k) {
            s.check(std::abs(gram(i, i) - basis.norms()(i)) / basis.norms()(i), 1e-13);
          } else {
            s.check(std::abs(gram(i, k)));
          }
        }
      }
    }
  });
}

SuiteResult basis_affine(Rng& rng) {
  return run_suite("basis-affine", "basis", 1e-13, [&](Suite& s) {
    const UniformParameter box({{0.0, 1.0}, {-3.0, 5.0}});
    const BasisSet mapped = build_basis(box, 5);
    const BasisSet standard = build_basis(UniformParameter::standard(2), 5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector2d xi(u(rng), u(rng));
      s.check((mapped.eval(box.from_standard(xi)) - standard.eval(xi)).cwiseAbs().maxCoeff());
    }
  });
}

SuiteResult lagrange_cardinality(Rng& rng) {
  return run_suite("lagrange-cardinality", "basis", 1e-12, [&](Suite& s) {
    for (int d = 1; d <= 2; ++d) {
      const Eigen::MatrixXd nodes = d == 1 ? default_sc_nodes(UniformParameter::standard(1), 8)
                                           : uniform_samples(UniformParameter::standard(2), 6, rng());
      const LagrangeBasis psi(nodes);
      for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
        const Eigen::VectorXd v = psi.eval(nodes.col(j));
        s.check((v - Eigen::VectorXd::Unit(nodes.cols(), j)).cwiseAbs().maxCoeff());
      }
    }
  });
}

// ---------------------------------------------------------------- expectation

SuiteResult engine_determinism() {
  return run_suite("engine-determinism", "expectation", 0.0, [](Suite& s) {
    const BasisSet basis = build_basis(UniformParameter::standard(2), 3);
    const VectorFunction f = [](const Eigen::VectorXd& x) {
      return Eigen::Vector2d(std::exp(x(0)) * x(1), std::cos(x(0) + x(1)));
    };
    const auto mc = ExpectationEngine::monte_carlo(20000, 42);
    const MomentSet a = moments_of(mc, basis.param(), basis, f);
    const MomentSet b = moments_of(mc, basis.param(), basis, f);
    s.check((a.mean - b.mean).cwiseAbs().maxCoeff());
    s.check((a.second - b.second).cwiseAbs().maxCoeff());
    s.check((a.cross - b.cross).cwiseAbs().maxCoeff());
    const auto q = ExpectationEngine::quadrature(9);
    s.check((moments_of(q, basis.param(), basis, f).cross - moments_of(q, basis.param(), basis, f).cross)
                .cwiseAbs()
                .maxCoeff());
  });
}

SuiteResult engine_agreement() {
  // Measure: worst |quadrature - MC| in units of the MC standard error.
  return run_suite("engine-agreement", "expectation", 5.0, [](Suite& s) {
    const UniformParameter param({{0.0, 2.0}, {-1.0, 1.0}});
    const int m = 4;
    // Total degree 2m - 1 = 7.
    const VectorFunction g = [](const Eigen::VectorXd& x) {
      return Eigen::Vector2d(std::pow(x(0), 4) * std::pow(x(1), 3) + x(0), 1.0 - x(0) * x(1) * x(1));
    };
    const Estimate exact = expect_with_error(ExpectationEngine::quadrature(m), param, g);
    const Estimate mc = expect_with_error(ExpectationEngine::monte_carlo(1000000, 7), param, g);
    for (Eigen::Index i = 0; i < 2; ++i) s.check(std::abs(exact.value(i) - mc.value(i)) / mc.std_error(i));
  });
}

SuiteResult covariance_psd(Rng& rng) {
  // Measure: -lambda_min / trace.
  return run_suite("covariance-psd", "expectation", 1e-10, [&](Suite& s) {
    for (int trial = 0; trial < 20; ++trial) {
      const BasisSet basis = build_basis(UniformParameter::standard(1), 3);
      const Eigen::Index n = uniform_int(rng, 1, 4);
      // Rank-deficient on purpose for n > 2: outputs share two basis directions.
      const Eigen::MatrixXd c = gaussian(rng, n, 2);
      const VectorFunction f = [c](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(c * Eigen::Vector2d(x(0), x(0) * x(0)));
      };
      const bool mc = trial % 2 == 1;
      const auto engine = mc ? ExpectationEngine::monte_carlo(5000, rng()) : ExpectationEngine::quadrature(6);
      const MomentSet mom = moments_of(engine, basis.param(), basis, f);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mom.covariance);
      s.check(std::max(0.0, -eig.eigenvalues()(0)) / std::max(mom.covariance.trace(), 1e-300));
    }
  });
}

// ---------------------------------------------------------------- approximators

SuiteResult gp_orthogonality(Rng& rng) {
  return run_suite("gp-orthogonality", "approximators", 1e-10, [&](Suite& s) {
    for (int d = 1; d <= 2; ++d) {
      const BasisSet basis = build_basis(UniformParameter::standard(d), 4);
      const BasisSet rich = build_basis(UniformParameter::standard(d), 6);
      const VectorFunction f = random_function(rng, rich, 2, true);
      const auto engine = ExpectationEngine::quadrature(12);
      const PCExpansion gp = solve_gp(engine, basis, f);
      const NodeSet set = engine.nodes(basis.param());
      Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(2, basis.size());
      for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
        const Eigen::VectorXd x = set.points.col(j);
        const Eigen::VectorXd phi = basis.eval(x);
        inner += set.weights(j) * (f(x) - gp.coeffs() * phi) * phi.transpose();
      }
      s.check(inner.cwiseAbs().maxCoeff());
    }
  });
}

SuiteResult gp_mean_exactness() {
  return run_suite("gp-mean-exactness", "approximators", 1e-13, [](Suite& s) {
    for (const auto& id : candidate_ids()) {
      const Candidate c = make_candidate(id);
      for (int kappa = 1; kappa <= 10; ++kappa) {
        const BasisSet basis = build_basis(UniformParameter::standard(1), kappa);
        const PCExpansion gp =
            solve_gp(ExpectationEngine::quadrature(c.quadrature_points(kappa)), basis, c.as_vector());
        s.check(std::abs(expansion_moments(gp).mean(0) - c.truth[0]));
      }
    }
  });
}

SuiteResult polynomial_exactness(Rng& rng) {
  return run_suite("polynomial-exactness", "approximators", 1e-10, [&](Suite& s) {
    for (int d = 1; d <= 2; ++d) {
      const int kappa = 3;
      const UniformParameter param = d == 1 ? UniformParameter({{-2.0, 3.0}}) : UniformParameter::standard(2);
      const BasisSet basis = build_basis(param, kappa);
      const VectorFunction f = random_function(rng, basis, 2, false);
      const PCExpansion gp = solve_gp(ExpectationEngine::default_for(kappa), basis, f);
      const PCExpansion ls = solve_ls(default_ls_grid(basis, rng()), basis, f);
      const SCInterpolant sc = solve_sc(default_sc_nodes(param, kappa, rng()), f);
      const Eigen::MatrixXd probe = uniform_samples(param, 100, rng());
      for (Eigen::Index j = 0; j < probe.cols(); ++j) {
        const Eigen::VectorXd x = probe.col(j);
        const Eigen::VectorXd truth = f(x);
        s.check((eval_expansion(gp, x) - truth).cwiseAbs().maxCoeff());
        s.check((eval_expansion(ls, x) - truth).cwiseAbs().maxCoeff());
        // Product Lagrange form reproduces polynomials only in one dimension.
        if (d == 1) s.check((eval_expansion(sc, x) - truth).cwiseAbs().maxCoeff());
      }
    }
  });
}

SuiteResult ls_optimality(Rng& rng) {
  // Measure: largest decrease of the grid residual under perturbation.
  return run_suite("ls-optimality", "approximators", 1e-12, [&](Suite& s) {
    const BasisSet basis = build_basis(UniformParameter::standard(1), 5);
    const BasisSet rich = build_basis(UniformParameter::standard(1), 8);
    const VectorFunction f = random_function(rng, rich, 2, true);
    const Eigen::MatrixXd grid = default_ls_grid(basis, rng());
    const PCExpansion ls = solve_ls(grid, basis, f);
    auto residual = [&](const Eigen::MatrixXd& coeffs) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < grid.cols(); ++j) {
        acc += (f(grid.col(j)) - coeffs * basis.eval(grid.col(j))).squaredNorm();
      }
      return acc;
    };
    const double best = residual(ls.coeffs());
    for (int i = 0; i < 100; ++i) {
      Eigen::MatrixXd delta = gaussian(rng, ls.coeffs().rows(), ls.coeffs().cols());
      delta *= 1e-3 / delta.norm();
      s.check(std::max(0.0, best - residual(ls.coeffs() + delta)));
    }
  });
}

// ---------------------------------------------------------------- constrained

SuiteResult moment_exact_recovery(Rng& rng) {
  return run_suite("moment-exact-recovery", "constrained", 1e-10, [&](Suite& s) {
    for (int trial = 0; trial < 60; ++trial) {
      const int n = uniform_int(rng, 1, 3);
      const int order = uniform_int(rng, n, n + 4);
      const BasisSet basis = build_basis(UniformParameter::standard(1), order);
      const Eigen::Index tail = basis.size() - 1;
      // Random PSD covariance, rank-deficient in a third of the trials.
      const Eigen::Index rank = trial % 3 == 0 ? std::max(1, n - 1) : n;
      const Eigen::MatrixXd b = gaussian(rng, n, rank);
      const Eigen::VectorXd mean = gaussian(rng, n, 1);
      const Eigen::MatrixXd second = b * b.transpose() + mean * mean.transpose();
      const MomentSet mom = MomentSet::from(mean, second, gaussian(rng, n, tail));
      const auto constraint = MomentConstraint::from(mom);
      const PCExpansion a = solve_constrained_L2(mom, basis);
      const PCExpansion r = assemble_theorem1(constraint, basis, random_feasible(rng, n, tail));
      for (const auto* e : {&a, &r}) {
        const ExpansionMoments m = expansion_moments(*e);
        s.check(relative(m.mean, mean));
        s.check(relative(m.second, second));
      }
    }
  });
}

SuiteResult projection_optimality(Rng& rng) {
  // Measure: max over U of J(U*) - J(U).
  return run_suite("projection-optimality", "constrained", 1e-10, [&](Suite& s) {
    for (int p = 0; p < 20; ++p) {
      const Problem prob = random_problem(rng);
      const PCExpansion best = solve_constrained_L2(prob.moments, prob.basis);
      const double j_star = l2_cost(prob.nodes, prob.basis, prob.f, best.coeffs());
      const auto constraint = MomentConstraint::from(prob.moments);
      for (int i = 0; i < 100; ++i) {
        const FeasibleU u = random_feasible(rng, prob.moments.dim(), prob.basis.size() - 1);
        const double j_u = l2_cost(prob.nodes, prob.basis, prob.f, assemble_theorem1(constraint, prob.basis, u).coeffs());
        s.check(std::max(0.0, j_star - j_u));
      }
    }
  });
}

SuiteResult cost_dominance(Rng& rng) {
  // Measure: |gap formula - direct cost difference|, and negativity of the gap.
  return run_suite("cost-dominance", "constrained", 1e-8, [&](Suite& s) {
    for (int p = 0; p < 20; ++p) {
      const Problem prob = random_problem(rng);
      const double j_gp =
          l2_cost(prob.nodes, prob.basis, prob.f, solve_gp(ExpectationEngine::quadrature(64), prob.basis, prob.f).coeffs());
      const auto constraint = MomentConstraint::from(prob.moments);
      for (int i = 0; i < 100; ++i) {
        const FeasibleU u = random_feasible(rng, prob.moments.dim(), prob.basis.size() - 1);
        const double gap = gp_cost_gap(prob.moments, prob.basis, u);
        const double j_u = l2_cost(prob.nodes, prob.basis, prob.f, assemble_theorem1(constraint, prob.basis, u).coeffs());
        s.check(std::max(0.0, -gap), 1e-12);
        s.check(std::abs(gap - (j_u - j_gp)));
      }
    }
  });
}

SuiteResult l2_agreement(Rng& rng) {
  return run_suite("l2-L2-agreement", "constrained", 1e-8, [&](Suite& s) {
    for (int trial = 0; trial < 10; ++trial) {
      const Problem prob = random_problem(rng);
      const auto engine = ExpectationEngine::quadrature(64);
      const NodeSet grid = engine.nodes(prob.basis.param());
      const PCExpansion a = solve_constrained_L2(prob.moments, prob.basis);
      const PCExpansion b = solve_constrained_l2(grid.points, prob.moments, prob.basis, prob.f, {}, grid.weights);
      s.check(relative(b.coeffs(), a.coeffs()));
    }
  });
}

SuiteResult higher_moments() {
  // Measure: constrained error / max(reference error, 2^-52), for m = 3, 4.
  // Constrained L2 is compared with GP; constrained l2 with the larger of the
  // LS and SC errors, the two sample-based methods it sits between.
  return run_suite("higher-moments", "constrained", 10.0, [](Suite& s) {
    const double floor = 0x1p-52;
    for (const auto& id : candidate_ids()) {
      const Candidate c = make_candidate(id);
      for (int kappa = 1; kappa <= 10; ++kappa) {
        const BasisSet basis = build_basis(UniformParameter::standard(1), kappa);
        const auto engine = ExpectationEngine::quadrature(c.quadrature_points(kappa));
        const NodeSet check = ExpectationEngine::quadrature(2 * kappa + 4).nodes(basis.param());
        const VectorFunction f = c.as_vector();
        const MomentSet mom = moments_of(engine, basis.param(), basis, f);
        const Eigen::MatrixXd grid = default_ls_grid(basis);
        const SCInterpolant sc = solve_sc(default_sc_nodes(basis.param(), kappa), f);
        const PCExpansion gp = solve_gp(engine, basis, f);
        const PCExpansion ls = solve_ls(grid, basis, f);
        const PCExpansion c_L2 = solve_constrained_L2(mom, basis);
        const PCExpansion c_l2 = solve_constrained_l2(grid, mom, basis, f);
        for (int m = 3; m <= 4; ++m) {
          const double truth = c.truth[static_cast<std::size_t>(m - 1)];
          auto error = [&](const auto& approx) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < check.weights.size(); ++j) {
              acc += check.weights(j) * std::pow(eval_expansion(approx, check.points.col(j))(0), m);
            }
            return std::max(std::abs(acc - truth), floor);
          };
          s.check(error(c_L2) / error(gp));
          s.check(error(c_l2) / std::max(error(ls), error(sc)));
        }
      }
    }
  });
}

// ---------------------------------------------------------------- propagator

const Dynamics kNonlinear = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
  return Eigen::VectorXd(-a(0) * x.array().square() + x.array().sin());
};

const UniformParameter kRate({{0.0, 1.0}});

// Residual e = Phi^T x_dot - f(Phi^T x, a) evaluated at each node.
std::vector<Eigen::VectorXd> residuals(const GPSurrogateODE& ode, const NodeSet& set, const Eigen::VectorXd& x_pc,
                                       const Eigen::VectorXd& x_dot) {
  const Eigen::MatrixXd x = unflatten(x_pc, ode.state_dim);
  const Eigen::MatrixXd xd = unflatten(x_dot, ode.state_dim);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const Eigen::VectorXd node = set.points.col(j);
    const Eigen::VectorXd phi = ode.basis.eval(node);
    out.push_back(xd * phi - ode.dynamics(x * phi, node));
  }
  return out;
}

SuiteResult gp_unbiased(Rng& rng) {
  return run_suite("gp-unbiased", "propagator", 1e-8, [&](Suite& s) {
    for (int i = 0; i < 20; ++i) {
      const BasisSet basis = build_basis(kRate, uniform_int(rng, 1, 4));
      const GPSurrogateODE ode{basis, 1, kNonlinear, ExpectationEngine::quadrature(64)};
      const Eigen::VectorXd x_pc = 0.5 * gaussian(rng, basis.size(), 1);
      const NodeSet set = ode.engine.nodes(basis.param());
      const auto e = residuals(ode, set, x_pc, gp_rhs(ode, x_pc));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(1);
      for (std::size_t j = 0; j < e.size(); ++j) mean += set.weights(static_cast<Eigen::Index>(j)) * e[j];
      s.check(mean.cwiseAbs().maxCoeff());
    }
  });
}

SuiteResult gp_stationarity(Rng& rng) {
  // Measure: largest decrease of E[e^T e] when the GP right side is perturbed.
  return run_suite("gp-stationarity", "propagator", 1e-10, [&](Suite& s) {
    for (int i = 0; i < 10; ++i) {
      const BasisSet basis = build_basis(kRate, uniform_int(rng, 1, 4));
      const GPSurrogateODE ode{basis, 1, kNonlinear, ExpectationEngine::quadrature(64)};
      const NodeSet set = ode.engine.nodes(basis.param());
      const Eigen::VectorXd x_pc = 0.5 * gaussian(rng, basis.size(), 1);
      const Eigen::VectorXd rhs = gp_rhs(ode, x_pc);
      auto cost = [&](const Eigen::VectorXd& x_dot) {
        const auto e = residuals(ode, set, x_pc, x_dot);
        double acc = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) acc += set.weights(static_cast<Eigen::Index>(j)) * e[j].squaredNorm();
        return acc;
      };
      const double base = cost(rhs);
      for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd delta = gaussian(rng, rhs.size(), 1);
        delta *= 1e-3 / delta.norm();
        s.check(std::max(0.0, base - cost(rhs + delta)));
      }
    }
  });
}

SuiteResult linear_consistency(Rng& rng) {
  return run_suite("linear-consistency", "propagator", 1e-12, [&](Suite& s) {
    for (int kappa = 1; kappa <= 4; ++kappa) {
      const BasisSet basis = build_basis(kRate, kappa);
      const auto engine = ExpectationEngine::quadrature(2 * kappa + 4);
      const Dynamics lin = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) { return Eigen::VectorXd(-a(0) * x); };
      const GPSurrogateODE ode{basis, 1, lin, engine};
      const Eigen::MatrixXd a = linear_gp_matrix(
          basis, engine, [](const Eigen::VectorXd& d) { return Eigen::MatrixXd::Constant(1, 1, -d(0)); });
      for (int i = 0; i < 5; ++i) {
        const Eigen::VectorXd x = gaussian(rng, basis.size(), 1);
        s.check((gp_rhs(ode, x) - a * x).cwiseAbs().maxCoeff());
      }
    }
  });
}

SuiteResult exact_linear_recovery(Rng& rng) {
  return run_suite("exact-linear-recovery", "propagator", 1e-8, [&](Suite& s) {
    for (int dim = 1; dim <= 4; ++dim) {
      // Orthogonal times a contraction keeps the trajectory well conditioned.
      const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, dim, dim)).householderQ();
      const Eigen::MatrixXd m = 0.95 * q;
      std::vector<Eigen::VectorXd> window{gaussian(rng, dim, 1)};
      for (int k = 0; k < 3 * dim; ++k) window.push_back(m * window.back());
      s.check((fit_transition(window) - m).cwiseAbs().maxCoeff());
    }
  });
}

SuiteResult reference_moment_exactness() {
  return run_suite("reference-moment-exactness", "propagator", 1e-10, [](Suite& s) {
    for (int kappa = 1; kappa <= 3; ++kappa) {
      const BasisSet basis = build_basis(kRate, kappa);
      const LinearDecayReference ref(basis, 0.05);
      for (std::size_t k = 0; k <= 200; k += 5) {
        const ReferenceStats st = ref(k);
        const StateMoments m = state_moments(basis, reconstruct_cpc(ref, basis, k), 1);
        s.check(std::abs(m.mean(0) - st.mean(0)));
        s.check(std::abs(m.covariance(0, 0) - (st.second(0, 0) - st.mean(0) * st.mean(0))));
      }
    }
  });
}

}  // namespace

bool SelftestReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& r) { return r.passed; });
}

std::string SelftestReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["suites"] = nlohmann::json::array();
  for (const auto& r : suites) {
    nlohmann::json e{{"name", r.name},
                     {"module", r.module},
                     {"passed", r.passed},
                     {"max_error", r.max_error},
                     {"tolerance", r.tolerance}};
    if (!r.detail.empty()) e["detail"] = r.detail;
    j["suites"].push_back(e);
  }
  return j.dump(2);
}

SelftestReport run_selftest(std::uint64_t seed) {
  Rng rng(seed);
  SelftestReport report;
  auto& s = report.suites;
  s.push_back(basis_orthogonality());
  s.push_back(basis_affine(rng));
  s.push_back(lagrange_cardinality(rng));
  s.push_back(engine_determinism());
  s.push_back(engine_agreement());
  s.push_back(covariance_psd(rng));
  s.push_back(gp_orthogonality(rng));
  s.push_back(gp_mean_exactness());
  s.push_back(polynomial_exactness(rng));
  s.push_back(ls_optimality(rng));
  s.push_back(moment_exact_recovery(rng));
  s.push_back(projection_optimality(rng));
  s.push_back(cost_dominance(rng));
  s.push_back(l2_agreement(rng));
  s.push_back(higher_moments());
  s.push_back(gp_unbiased(rng));
  s.push_back(gp_stationarity(rng));
  s.push_back(linear_consistency(rng));
  s.push_back(exact_linear_recovery(rng));
  s.push_back(reference_moment_exactness());
  return report;
}

}  // namespace pce
