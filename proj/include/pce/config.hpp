#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pce {

/// Settings for one experiment run.
///
/// Text form is one `key = value` per line, `#` starts a comment. Keys:
///   experiment        fig-pcerrors | fig-conGPC | fig-conSC | ode-linear |
///                     ode-nonlinear | window-sweep | selftest
///   kappa             list or range: "1-10", "1,2,3"
///   function          delta8 | rational | sin2 | gaussbump | custom
///   custom_coeffs     polynomial coefficients, constant term first
///   methods           subset of gp,sc,ls,cL2,cl2
///   quadrature_points 0 picks a rule from the function and order
///   seed              grid and Monte Carlo seed
///   out               output CSV path ("-" for stdout)
///   step, horizon     RK4 step and final time
///   window            q as a multiple of n(N+1)
///   window_multipliers  list for the window sweep
///   mc_paths          Monte Carlo ensemble size
///   free_running      true | false
///   max_condition     Gram condition limit for the transition fit
struct ExperimentConfig {
  std::string experiment = "fig-pcerrors";
  std::vector<int> kappas;
  std::string function = "delta8";
  std::vector<double> custom_coeffs;
  std::vector<std::string> methods;
  int quadrature_points = 0;
  std::uint64_t seed = 0x5eed2020ULL;
  std::string out = "-";

  double step = 0.01;
  double horizon = 10.0;
  int window = 1;
  std::vector<int> window_multipliers{1, 5, 10};
  std::size_t mc_paths = 100000;
  bool free_running = false;
  double max_condition = 1e12;

  /// Applies one key/value pair. Throws InvalidArgument on unknown keys or
  /// malformed values.
  void apply(const std::string& key, const std::string& value);

  /// Fills empty kappa/method lists with per-experiment defaults and checks
  /// invariants.
  void finalize();

  std::size_t steps() const;
};

/// Applies the settings in `in` on top of `base`.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace pce
