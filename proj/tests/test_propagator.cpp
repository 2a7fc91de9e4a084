#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "pce/errors.hpp"
#include "pce/propagator.hpp"

using namespace pce;
using doctest::Approx;

namespace {

const UniformParameter kRate({{0.0, 1.0}});

const Dynamics kDecay = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) { return Eigen::VectorXd(-a(0) * x); };

}  // namespace

TEST_CASE("linear GP matrix for dx/dt = -a x at order 1") {
  const BasisSet b = build_basis(kRate, 1);
  const Eigen::MatrixXd a = linear_gp_matrix(b, ExpectationEngine::default_for(1), [](const Eigen::VectorXd& d) {
    return Eigen::MatrixXd::Constant(1, 1, -d(0));
  });
  Eigen::Matrix2d expected;
  expected << -0.5, -1.0 / 6, -0.5, -0.5;
  CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-15);
  const GPSurrogateODE ode{b, 1, kDecay, ExpectationEngine::default_for(1)};
  const Eigen::Vector2d x(0.7, -0.2);
  CHECK((gp_rhs(ode, x) - expected * x).norm() < 1e-15);
}

TEST_CASE("linear GP matrix for a two-state system") {
  const BasisSet b = build_basis(kRate, 2);
  const auto engine = ExpectationEngine::default_for(2);
  const auto system = [](const Eigen::VectorXd& d) {
    Eigen::MatrixXd a(2, 2);
    a << -d(0), 1.0, -1.0, -2 * d(0) * d(0);
    return a;
  };
  const Dynamics dyn = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    return Eigen::VectorXd(system(d) * x);
  };
  const GPSurrogateODE ode{b, 2, dyn, engine};
  const Eigen::MatrixXd a = linear_gp_matrix(b, engine, system);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  CHECK((gp_rhs(ode, x) - a * x).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("GP right side edge cases") {
  const BasisSet b = build_basis(kRate, 2);
  const Dynamics zero = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(x.size()); };
  const GPSurrogateODE z{b, 1, zero, ExpectationEngine::quadrature(8)};
  CHECK(gp_rhs(z, Eigen::Vector3d(1, 2, 3)).norm() == 0.0);

  const BasisSet b0 = build_basis(kRate, 0);
  const Dynamics det = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x.array().sin() - x.array().square());
  };
  const GPSurrogateODE d{b0, 2, det, ExpectationEngine::quadrature(5)};
  const Eigen::Vector2d x(0.3, -1.2);
  CHECK((gp_rhs(d, x) - det(x, Eigen::VectorXd::Zero(1))).norm() < 1e-15);
  CHECK_THROWS_AS(gp_rhs(d, Eigen::Vector3d(1, 2, 3)), DimensionMismatch);
}

TEST_CASE("RK4 step on dx/dt = -x") {
  auto rhs = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  const double h = 0.1;
  const double expected = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
  CHECK(rk4_step(rhs, Eigen::VectorXd::Ones(1), h)(0) == Approx(expected).epsilon(1e-15));
  CHECK(expected == Approx(0.9048375).epsilon(1e-15));
}

TEST_CASE("RK4 on a linear system is the fourth-order Taylor polynomial") {
  Eigen::Matrix3d m;
  m << -1, 0.5, 0, 0.2, -0.3, 1, 0, -1, -0.1;
  auto rhs = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(m * x); };
  const double h = 0.05;
  const Eigen::Matrix3d hm = h * m;
  const Eigen::Matrix3d taylor =
      Eigen::Matrix3d::Identity() + hm + hm * hm / 2 + hm * hm * hm / 6 + hm * hm * hm * hm / 24;
  const Eigen::Vector3d x(1, -2, 0.5);
  CHECK((rk4_step(rhs, Eigen::VectorXd(x), h) - taylor * x).norm() < 1e-15);
  auto none = [](const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(v.size()).eval(); };
  CHECK(rk4_step(none, Eigen::VectorXd(x), h) == Eigen::VectorXd(x));
}

TEST_CASE("RK4 errors") {
  auto rhs = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  CHECK_THROWS_AS(rk4_step(rhs, Eigen::VectorXd::Ones(1), 0.0), InvalidArgument);
  auto second_stage_blows_up = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x(0) == 1.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN());
  };
  try {
    rk4_step(second_stage_blows_up, Eigen::VectorXd::Ones(1), 0.1);
    FAIL("expected NonFiniteStage");
  } catch (const NonFiniteStage& e) {
    CHECK(e.stage() == 2);
  }
}

TEST_CASE("transition fit recovers a known matrix") {
  Eigen::Matrix2d a;
  a << 0.9, 0.1, 0.0, 0.8;
  std::vector<Eigen::VectorXd> window{Eigen::Vector2d(1, 1)};
  for (int j = 0; j < 3; ++j) window.push_back(a * window.back());
  CHECK((fit_transition(window) - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("transition fit on scalar sequences") {
  std::vector<Eigen::VectorXd> geometric, constant;
  for (int j = 0; j <= 5; ++j) {
    geometric.push_back(Eigen::VectorXd::Constant(1, std::pow(0.7, j)));
    constant.push_back(Eigen::VectorXd::Constant(1, -3.0));
  }
  CHECK(fit_transition(geometric)(0, 0) == Approx(0.7).epsilon(1e-12));
  CHECK(fit_transition(constant)(0, 0) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("transition fit rejects rank-deficient windows") {
  std::vector<Eigen::VectorXd> collinear;
  for (int j = 0; j <= 4; ++j) collinear.push_back(Eigen::Vector2d(1, 2) * std::pow(0.5, j));
  CHECK_THROWS_AS(fit_transition(collinear), IllConditioned);
  std::vector<Eigen::VectorXd> short_window{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  CHECK_THROWS_AS(fit_transition(short_window), IllConditioned);
}

TEST_CASE("linear decay reference") {
  const BasisSet b = build_basis(kRate, 2);
  const LinearDecayReference ref(b, 0.01);
  const ReferenceStats s0 = ref(0);
  CHECK(s0.mean(0) == 1.0);
  CHECK(s0.second(0, 0) == 1.0);
  const ReferenceStats s1 = ref(100);
  CHECK(s1.mean(0) == Approx(1 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(s1.second(0, 0) == Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-14));
  CHECK(ref.at_time(2.0).mean(0) == Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-14));
  const ReferenceStats tiny = ref.at_time(1e-9);
  CHECK(tiny.mean(0) == Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(tiny.second(0, 0) - tiny.mean(0) * tiny.mean(0)) < 1e-15);
  // R(1) = E[exp(-a) phi_k(a)] against Simpson.
  for (int k = 1; k <= 2; ++k) {
    const double expected =
        oracle::simpson_mean([k](double a) { return std::exp(-a) * oracle::legendre(k, 2 * a - 1); }, 0, 1);
    CHECK(s1.cross(0, k - 1) == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("reconstructed coefficients carry the reference moments") {
  const BasisSet b = build_basis(kRate, 3);
  const LinearDecayReference ref(b, 0.01);
  const Eigen::VectorXd x0 = reconstruct_cpc(ref, b, 0);
  CHECK(x0(0) == 1.0);
  CHECK(x0.tail(3).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k : {1u, 50u, 100u, 700u}) {
    const ReferenceStats s = ref(k);
    const StateMoments m = state_moments(b, reconstruct_cpc(ref, b, k), 1);
    CHECK(std::abs(m.mean(0) - s.mean(0)) < 1e-12);
    CHECK(std::abs(m.covariance(0, 0) - (s.second(0, 0) - s.mean(0) * s.mean(0))) < 1e-12);
  }
}

TEST_CASE("algorithm 1 reproduces exactly linear coefficient dynamics") {
  const BasisSet b = build_basis(kRate, 2);
  const auto engine = ExpectationEngine::default_for(2);
  const GPSurrogateODE ode{b, 1, kDecay, engine};
  const double h = 0.05;
  const std::size_t steps = 120;
  // Provider built from the GP surrogate itself: x_cpc^k is its trajectory.
  std::vector<Eigen::VectorXd> traj{Eigen::Vector3d(1.0, 0.0, 0.0)};
  traj.front() = Eigen::Vector3d(0.8, 0.3, -0.1);
  auto rhs = [&](const Eigen::VectorXd& x) { return gp_rhs(ode, x); };
  for (std::size_t k = 0; k < steps; ++k) traj.push_back(rk4_step(rhs, traj.back(), h));
  const Eigen::VectorXd w = b.norms();
  const ReferenceStatsProvider provider = [&](std::size_t k) {
    const Eigen::RowVectorXd f = traj[k].transpose();
    ReferenceStats s;
    s.mean = Eigen::VectorXd::Constant(1, f(0));
    s.second = Eigen::MatrixXd::Constant(1, 1, f.cwiseProduct(w.transpose()).dot(f));
    s.cross = f.tail(2).cwiseProduct(w.tail(2).transpose());
    return s;
  };
  const std::size_t q = 3;
  const auto result = run_algorithm1(ode, provider, b, q, steps, h);
  for (std::size_t k = 0; k <= steps; ++k) CHECK((result.reference[k] - traj[k]).norm() < 1e-12);
  for (std::size_t k = q + 1; k <= steps; ++k) CHECK((result.predicted[k] - result.reference[k]).norm() < 1e-8);
  CHECK(result.predicted.size() == steps + 1);
  CHECK(result.gp.size() == steps + 1);
}

TEST_CASE("algorithm 1 preconditions and fallback") {
  const BasisSet b = build_basis(kRate, 1);
  const GPSurrogateODE ode{b, 1, kDecay, ExpectationEngine::default_for(1)};
  const LinearDecayReference ref(b, 0.01);
  CHECK_THROWS_AS(run_algorithm1(ode, ref, b, 1, 50, 0.01), InvalidArgument);
  CHECK_THROWS_AS(run_algorithm1(ode, ref, b, 2, 2, 0.01), InvalidArgument);

  // A deterministic constant state gives a rank-one window at every step.
  const ReferenceStatsProvider still = [](std::size_t) {
    return ReferenceStats{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  };
  const Dynamics none = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(x.size()); };
  const GPSurrogateODE flat{b, 1, none, ExpectationEngine::default_for(1)};
  const auto result = run_algorithm1(flat, still, b, 2, 10, 0.1);
  CHECK(result.fallback_steps.size() == 8);
  CHECK(result.fallback_steps.front() == 2);
  CHECK(result.diagnostics.size() == 8);
  CHECK((result.predicted[10] - Eigen::Vector2d(1, 0)).norm() < 1e-15);
}

TEST_CASE("algorithm 1 beats the GP propagator on the linear ODE at order 1") {
  const BasisSet b = build_basis(kRate, 1);
  const GPSurrogateODE ode{b, 1, kDecay, ExpectationEngine::default_for(1)};
  const LinearDecayReference ref(b, 0.01);
  const auto result = run_algorithm1(ode, ref, b, 2, 1000, 0.01);
  const double truth = ref(1000).mean(0);
  const double alg = state_moments(b, result.predicted[1000], 1).mean(0);
  const double gp = state_moments(b, result.gp[1000], 1).mean(0);
  CHECK(std::abs(alg - truth) < std::abs(gp - truth));
}

TEST_CASE("Monte Carlo reference") {
  const BasisSet b = build_basis(kRate, 2);
  const BatchDynamics batch = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& a) {
    return Eigen::MatrixXd(-(x.array() * a.array()));
  };
  MonteCarloReference::Settings s;
  s.paths = 20000;
  s.seed = 4;
  s.step = 0.1;
  s.steps = 20;
  const MonteCarloReference mc(b, batch, Eigen::VectorXd::Ones(1), s);
  const MonteCarloReference again(b, batch, Eigen::VectorXd::Ones(1), s);
  CHECK(mc.steps() == 20);
  CHECK(mc.stats(20).mean == again.stats(20).mean);
  CHECK(mc.stats(20).cross == again.stats(20).cross);
  const LinearDecayReference exact(b, 0.1);
  const double t2_mean = exact(20).mean(0);
  CHECK(std::abs(mc.stats(20).mean(0) - t2_mean) < 5 * mc.mean_std_error(20)(0));
  const double var = exact(20).second(0, 0) - t2_mean * t2_mean;
  const double mc_var = mc.stats(20).second(0, 0) - mc.stats(20).mean(0) * mc.stats(20).mean(0);
  CHECK(std::abs(mc_var - var) < 5 * mc.variance_std_error(20)(0));
  CHECK(mc.mean_std_error(0)(0) == 0.0);

  const BasisSet smaller = build_basis(kRate, 1);
  const auto p = mc.provider(smaller);
  CHECK(p(5).cross.cols() == 1);
  CHECK(p(5).cross(0, 0) == mc.stats(5).cross(0, 0));
  CHECK_THROWS_AS(mc.provider(build_basis(kRate, 3)), InvalidArgument);
  CHECK_THROWS_AS(mc.provider(build_basis(UniformParameter::standard(1), 1)), InvalidArgument);
}

TEST_CASE("flatten is column-major and round-trips") {
  Eigen::MatrixXd f(2, 3);
  f << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd v = flatten(f);
  CHECK(v(1) == 4);
  CHECK(v(2) == 2);
  CHECK(unflatten(v, 2) == f);
  CHECK_THROWS_AS(unflatten(v, 4), DimensionMismatch);
}

TEST_CASE("coefficient series validates lengths") {
  CoefficientSeries s(0.1, 2, 3);
  CHECK(s.length() == 6);
  CHECK_THROWS_AS(s.push_back(Eigen::VectorXd::Zero(5)), DimensionMismatch);
  s.push_back(Eigen::VectorXd::Zero(6));
  CHECK(s.size() == 1);
  CHECK(s.time(3) == Approx(0.3));
  CHECK_THROWS_AS(CoefficientSeries(0.0, 1, 1), InvalidArgument);
}
