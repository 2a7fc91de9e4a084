#include "pce/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>

#include "pce/approximators.hpp"
#include "pce/basis.hpp"
#include "pce/candidates.hpp"
#include "pce/constrained.hpp"
#include "pce/errors.hpp"
#include "pce/expectation.hpp"
#include "pce/propagator.hpp"

namespace pce {

namespace {

constexpr double kErrorFloor = 0x1p-52;
constexpr int kNonlinearQuadrature = 64;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

// Raw moments E[g^m], m = 1..4, of a scalar function under a quadrature rule.
template <typename Eval>
std::array<double, 4> raw_moments(const NodeSet& set, Eval&& eval) {
  std::array<double, 4> out{};
  for (Eigen::Index j = 0; j < set.weights.size(); ++j) {
    const double v = eval(set.points.col(j));
    double p = 1.0;
    for (std::size_t m = 0; m < 4; ++m) {
      p *= v;
      out[m] += set.weights(j) * p;
    }
  }
  return out;
}

std::array<double, 4> expansion_raw_moments(const PCExpansion& e, const NodeSet& set) {
  auto out = raw_moments(set, [&](const Eigen::VectorXd& x) { return eval_expansion(e, x)(0); });
  // The first two come straight from the coefficients.
  const ExpansionMoments m = expansion_moments(e);
  out[0] = m.mean(0);
  out[1] = m.second(0, 0);
  return out;
}

std::array<double, 4> method_moments(const std::string& method, const Candidate& c, const BasisSet& basis,
                                     const ExperimentConfig& config) {
  const int kappa = basis.order();
  const auto& param = basis.param();
  const VectorFunction f = c.as_vector();
  const int points = config.quadrature_points > 0 ? config.quadrature_points : c.quadrature_points(kappa);
  const ExpectationEngine engine = ExpectationEngine::quadrature(points);
  // Exact for f_hat^4 when f_hat has degree kappa.
  const NodeSet check = ExpectationEngine::quadrature(2 * kappa + 4).nodes(param);

  if (method == "gp") return expansion_raw_moments(solve_gp(engine, basis, f), check);
  if (method == "ls") return expansion_raw_moments(solve_ls(default_ls_grid(basis, config.seed), basis, f), check);
  if (method == "cL2") return expansion_raw_moments(solve_constrained_L2(moments_of(engine, param, basis, f), basis), check);
  if (method == "cl2") {
    const MomentSet moments = moments_of(engine, param, basis, f);
    return expansion_raw_moments(
        solve_constrained_l2(default_ls_grid(basis, config.seed), moments, basis, f), check);
  }
  if (method == "sc") {
    const SCInterpolant sc = solve_sc(default_sc_nodes(param, kappa, config.seed), f);
    return raw_moments(check, [&](const Eigen::VectorXd& x) { return eval_expansion(sc, x)(0); });
  }
  throw InvalidArgument("unknown method '" + method + "'");
}

std::string schema_line(const std::string& schema, const ExperimentConfig& config) {
  return "# schema: " + schema + " experiment=" + config.experiment + " function=" + config.function +
         " kappa=" + join_ints(config.kappas) + " seed=" + std::to_string(config.seed) + "\n";
}

// Per-system pieces of the ODE experiments.
struct OdeSystem {
  std::string name;
  Dynamics dynamics;
  std::function<ReferenceStatsProvider(const BasisSet&)> provider;
  std::function<ExpectationEngine(int)> engine;
  std::shared_ptr<MonteCarloReference> mc;
};

UniformParameter rate_parameter() { return UniformParameter({Interval{0.0, 1.0}}); }

OdeSystem make_system(const std::string& name, const ExperimentConfig& config, int max_kappa) {
  OdeSystem sys;
  sys.name = name;
  const double h = config.step;
  if (name == "linear") {
    sys.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) { return Eigen::VectorXd(-a(0) * x); };
    sys.provider = [h](const BasisSet& basis) -> ReferenceStatsProvider {
      auto ref = std::make_shared<LinearDecayReference>(basis, h);
      return [ref](std::size_t k) { return (*ref)(k); };
    };
    const int fixed = config.quadrature_points;
    sys.engine = [fixed](int kappa) { return ExpectationEngine::quadrature(fixed > 0 ? fixed : 2 * kappa + 4); };
    return sys;
  }
  sys.dynamics = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    return Eigen::VectorXd(-a(0) * x.array().square() + x.array().sin());
  };
  MonteCarloReference::Settings s;
  s.paths = config.mc_paths;
  s.seed = config.seed;
  s.step = h;
  s.steps = config.steps();
  const BatchDynamics batch = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& a) {
    return Eigen::MatrixXd((-(x.array().square().rowwise() * a.row(0).array()) + x.array().sin()).matrix());
  };
  sys.mc = std::make_shared<MonteCarloReference>(build_basis(rate_parameter(), max_kappa), batch,
                                                 Eigen::VectorXd::Ones(1), s);
  auto mc = sys.mc;
  sys.provider = [mc](const BasisSet& basis) { return mc->provider(basis); };
  const int fixed = config.quadrature_points;
  sys.engine = [fixed](int) { return ExpectationEngine::quadrature(fixed > 0 ? fixed : kNonlinearQuadrature); };
  return sys;
}

struct Run {
  Algorithm1Result result;
  ReferenceStatsProvider provider;
  BasisSet basis;
  std::size_t q;
};

Run run_one(const OdeSystem& sys, const ExperimentConfig& config, int kappa, int multiplier) {
  BasisSet basis = build_basis(rate_parameter(), kappa);
  const std::size_t q = static_cast<std::size_t>(multiplier) * static_cast<std::size_t>(basis.size());
  GPSurrogateODE ode{basis, 1, sys.dynamics, sys.engine(kappa)};
  ReferenceStatsProvider provider = sys.provider(basis);
  Algorithm1Options options;
  options.free_running = config.free_running;
  options.max_condition = config.max_condition;
  auto result = run_algorithm1(ode, provider, basis, q, config.steps(), config.step, options);
  return Run{std::move(result), std::move(provider), std::move(basis), q};
}

bool in_average_window(double t) { return t >= 1.0 - 1e-9; }

}  // namespace

double floor_error(double error) { return std::isnan(error) ? error : std::max(error, kErrorFloor); }

std::vector<SweepRow> run_moment_sweep(const ExperimentConfig& config) {
  const Candidate c = make_candidate(config.function, config.custom_coeffs);
  std::vector<SweepRow> rows;
  for (int kappa : config.kappas) {
    const BasisSet basis = build_basis(UniformParameter::standard(1), kappa);
    for (const auto& method : config.methods) {
      std::array<double, 4> est{};
      std::string status = "ok";
      try {
        est = method_moments(method, c, basis, config);
      } catch (const InvalidArgument&) {
        throw;
      } catch (const Error& e) {
        status = e.what();
        est.fill(std::numeric_limits<double>::quiet_NaN());
      }
      for (int m = 1; m <= 4; ++m) {
        const auto i = static_cast<std::size_t>(m - 1);
        rows.push_back(SweepRow{kappa, method, m, c.truth[i], est[i], std::abs(c.truth[i] - est[i]), status});
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  out << schema_line("pce-sweep/1", config);
  out << "kappa,method,moment,truth,estimate,abs_error,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << r.kappa << ',' << r.method << ',' << r.moment << ',' << num(r.truth) << ',' << num(r.estimate) << ','
        << num(floor_error(r.error)) << ',' << status << '\n';
  }
}

OdeResult run_ode_experiment(const ExperimentConfig& config) {
  const std::string name = config.experiment == "ode-nonlinear" ? "nonlinear" : "linear";
  const int max_kappa = *std::max_element(config.kappas.begin(), config.kappas.end());
  const OdeSystem sys = make_system(name, config, max_kappa);

  OdeResult out;
  out.system = name;
  const std::size_t steps = config.steps();
  for (int kappa : config.kappas) {
    const Run run = run_one(sys, config, kappa, config.window);
    OdeSummary sum;
    sum.kappa = kappa;
    sum.q = run.q;
    sum.fallbacks = run.result.fallback_steps.size();
    std::size_t count = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = config.step * static_cast<double>(k);
      const ReferenceStats ref = run.provider(k);
      const StateMoments gp = state_moments(run.basis, run.result.gp[k], 1);
      const StateMoments alg = state_moments(run.basis, run.result.predicted[k], 1);
      OdeSample s;
      s.kappa = kappa;
      s.step = k;
      s.t = t;
      s.dim = 0;
      s.ref_mean = ref.mean(0);
      s.ref_var = ref.second(0, 0) - ref.mean(0) * ref.mean(0);
      s.gp_mean = gp.mean(0);
      s.gp_var = gp.covariance(0, 0);
      s.alg1_mean = alg.mean(0);
      s.alg1_var = alg.covariance(0, 0);
      out.samples.push_back(s);

      const double gm = std::abs(s.gp_mean - s.ref_mean), gv = std::abs(s.gp_var - s.ref_var);
      if (k == static_cast<std::size_t>(std::llround(1.0 / config.step))) {
        sum.gp_mean_err_t1 = gm;
        sum.gp_var_err_t1 = gv;
      }
      if (k == steps) {
        sum.gp_mean_err_end = gm;
        sum.gp_var_err_end = gv;
      }
      if (in_average_window(t)) {
        ++count;
        sum.gp_mean_avg += gm;
        sum.gp_var_avg += gv;
        sum.alg1_mean_avg += std::abs(s.alg1_mean - s.ref_mean);
        sum.alg1_var_avg += std::abs(s.alg1_var - s.ref_var);
        if (sys.mc) {
          sum.ref_mean_se_avg += sys.mc->mean_std_error(k)(0);
          sum.ref_var_se_avg += sys.mc->variance_std_error(k)(0);
        }
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(count, 1));
    sum.gp_mean_avg /= n;
    sum.gp_var_avg /= n;
    sum.alg1_mean_avg /= n;
    sum.alg1_var_avg /= n;
    sum.ref_mean_se_avg /= n;
    sum.ref_var_se_avg /= n;
    out.summaries.push_back(sum);
  }
  return out;
}

void write_ode_csv(std::ostream& out, const ExperimentConfig& config, const OdeResult& result) {
  out << schema_line("pce-ode/1", config);
  out << "# system=" << result.system << " step=" << num(config.step) << " horizon=" << num(config.horizon)
      << " window=" << config.window << " free_running=" << (config.free_running ? "true" : "false");
  if (result.system == "nonlinear") out << " mc_paths=" << config.mc_paths;
  out << "\n";
  out << "kappa,t,dim,ref_mean,ref_var,gp_mean,gp_var,alg1_mean,alg1_var,"
         "gp_mean_abs_error,gp_var_abs_error,alg1_mean_abs_error,alg1_var_abs_error\n";
  for (const auto& s : result.samples) {
    out << s.kappa << ',' << num(s.t) << ',' << s.dim << ',' << num(s.ref_mean) << ',' << num(s.ref_var) << ','
        << num(s.gp_mean) << ',' << num(s.gp_var) << ',' << num(s.alg1_mean) << ',' << num(s.alg1_var) << ','
        << num(floor_error(std::abs(s.gp_mean - s.ref_mean))) << ','
        << num(floor_error(std::abs(s.gp_var - s.ref_var))) << ','
        << num(floor_error(std::abs(s.alg1_mean - s.ref_mean))) << ','
        << num(floor_error(std::abs(s.alg1_var - s.ref_var))) << '\n';
  }
}

void write_ode_summary_csv(std::ostream& out, const ExperimentConfig& config, const OdeResult& result) {
  out << schema_line("pce-ode-summary/1", config);
  out << "kappa,q,gp_mean_avg_error,alg1_mean_avg_error,gp_var_avg_error,alg1_var_avg_error,"
         "gp_mean_error_t1,gp_mean_error_end,gp_var_error_t1,gp_var_error_end,ref_mean_se_avg,ref_var_se_avg,"
         "fallbacks\n";
  for (const auto& s : result.summaries) {
    out << s.kappa << ',' << s.q << ',' << num(floor_error(s.gp_mean_avg)) << ','
        << num(floor_error(s.alg1_mean_avg)) << ',' << num(floor_error(s.gp_var_avg)) << ','
        << num(floor_error(s.alg1_var_avg)) << ',' << num(floor_error(s.gp_mean_err_t1)) << ','
        << num(floor_error(s.gp_mean_err_end)) << ',' << num(floor_error(s.gp_var_err_t1)) << ','
        << num(floor_error(s.gp_var_err_end)) << ',' << num(s.ref_mean_se_avg) << ',' << num(s.ref_var_se_avg)
        << ',' << s.fallbacks << '\n';
  }
}

std::vector<WindowRow> run_window_sweep(const ExperimentConfig& config) {
  const int kappa = config.kappas.front();
  const OdeSystem sys = make_system("linear", config, kappa);
  const std::size_t steps = config.steps();
  std::vector<WindowRow> rows;
  for (int multiplier : config.window_multipliers) {
    const Run run = run_one(sys, config, kappa, multiplier);
    WindowRow row;
    row.multiplier = multiplier;
    row.q = run.q;
    row.terminal_t = config.step * static_cast<double>(steps);
    row.fallbacks = run.result.fallback_steps.size();
    std::size_t count = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double err =
          std::abs(state_moments(run.basis, run.result.predicted[k], 1).mean(0) - run.provider(k).mean(0));
      if (k == steps) row.terminal_mean_error = err;
      if (in_average_window(config.step * static_cast<double>(k))) {
        row.avg_mean_error += err;
        ++count;
      }
    }
    row.avg_mean_error /= static_cast<double>(std::max<std::size_t>(count, 1));
    rows.push_back(row);
  }
  return rows;
}

void write_window_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<WindowRow>& rows) {
  out << schema_line("pce-window/1", config);
  out << "multiplier,q,terminal_t,terminal_mean_abs_error,avg_mean_abs_error,fallbacks\n";
  for (const auto& r : rows) {
    out << r.multiplier << ',' << r.q << ',' << num(r.terminal_t) << ',' << num(floor_error(r.terminal_mean_error))
        << ',' << num(floor_error(r.avg_mean_error)) << ',' << r.fallbacks << '\n';
  }
}

}  // namespace pce
