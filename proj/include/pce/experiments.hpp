#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pce/config.hpp"

namespace pce {

/// Smallest error written to any CSV (2^-52).
double floor_error(double error);

struct SweepRow {
  int kappa = 0;
  std::string method;
  int moment = 0;
  double truth = 0.0;
  double estimate = 0.0;
  double error = 0.0;  // |truth - estimate|, before flooring
  std::string status = "ok";
};

/// |E[f^m] - E[f_hat^m]| for m = 1..4, every kappa and method in the config.
/// Rows are ordered by kappa, then method as listed, then m.
std::vector<SweepRow> run_moment_sweep(const ExperimentConfig& config);
void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<SweepRow>& rows);

struct OdeSample {
  int kappa = 0;
  std::size_t step = 0;
  double t = 0.0;
  int dim = 0;
  double ref_mean = 0.0, ref_var = 0.0;
  double gp_mean = 0.0, gp_var = 0.0;
  double alg1_mean = 0.0, alg1_var = 0.0;
};

struct OdeSummary {
  int kappa = 0;
  std::size_t q = 0;
  // Time averages of absolute errors over t in [1, horizon].
  double gp_mean_avg = 0.0, gp_var_avg = 0.0;
  double alg1_mean_avg = 0.0, alg1_var_avg = 0.0;
  // GP errors at t = 1 and at the horizon.
  double gp_mean_err_t1 = 0.0, gp_mean_err_end = 0.0;
  double gp_var_err_t1 = 0.0, gp_var_err_end = 0.0;
  // Time-averaged Monte Carlo standard errors; zero for the analytic reference.
  double ref_mean_se_avg = 0.0, ref_var_se_avg = 0.0;
  std::size_t fallbacks = 0;
};

struct OdeResult {
  std::string system;  // "linear" or "nonlinear"
  std::vector<OdeSample> samples;
  std::vector<OdeSummary> summaries;
};

/// dx/dt = -a x (linear) or dx/dt = -a x^2 + sin x (nonlinear), a ~ U[0, 1],
/// x(0) = 1. Runs the GP surrogate and the linear propagator for each kappa.
OdeResult run_ode_experiment(const ExperimentConfig& config);
void write_ode_csv(std::ostream& out, const ExperimentConfig& config, const OdeResult& result);
void write_ode_summary_csv(std::ostream& out, const ExperimentConfig& config, const OdeResult& result);

struct WindowRow {
  int multiplier = 0;
  std::size_t q = 0;
  double terminal_t = 0.0;
  double terminal_mean_error = 0.0;
  double avg_mean_error = 0.0;  // over t in [1, horizon]
  std::size_t fallbacks = 0;
};

/// Linear ODE at the first configured kappa with q = multiplier * n(N+1).
std::vector<WindowRow> run_window_sweep(const ExperimentConfig& config);
void write_window_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<WindowRow>& rows);

}  // namespace pce
