// pcbench: runs moment sweeps, ODE tracking and window studies as CSV, plus
// the invariant self-test.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pce/config.hpp"
#include "pce/errors.hpp"
#include "pce/experiments.hpp"
#include "pce/selftest.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string kappa;
  std::string function;
  std::string method;
  std::string experiment;
};

pce::ExperimentConfig resolve(const Overrides& o, const std::string& default_experiment) {
  pce::ExperimentConfig config;
  config.experiment = default_experiment;
  if (!o.config_path.empty()) config = pce::load_config(o.config_path, config);
  if (!o.experiment.empty()) config.apply("experiment", o.experiment);
  if (!o.out.empty()) config.apply("out", o.out);
  if (o.seed) config.seed = *o.seed;
  if (!o.kappa.empty()) config.apply("kappa", o.kappa);
  if (!o.function.empty()) config.apply("function", o.function);
  if (!o.method.empty()) config.apply("methods", o.method);
  config.finalize();
  return config;
}

// PCE_OUT_DIR relocates relative output paths.
std::string output_path(const std::string& out) {
  const char* dir = std::getenv("PCE_OUT_DIR");
  if (out == "-" || !dir || !*dir || std::filesystem::path(out).is_absolute()) return out;
  return (std::filesystem::path(dir) / out).string();
}

void with_output(const std::string& out, const std::function<void(std::ostream&)>& write) {
  const std::string path = output_path(out);
  if (path == "-") {
    write(std::cout);
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream file(path);
  if (!file) throw pce::InvalidArgument("cannot write '" + path + "'");
  write(file);
  std::cerr << "wrote " << path << "\n";
}

std::string sibling(const std::string& out, const std::string& suffix) {
  if (out == "-") return out;
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--out", o.out, "output CSV path, - for stdout");
  cmd->add_option("--seed", o.seed, "seed for grids and Monte Carlo");
  cmd->add_option("--kappa", o.kappa, "orders, e.g. 1-10 or 1,2,3");
  cmd->add_option("--function", o.function, "delta8 | rational | sin2 | gaussbump | custom");
  cmd->add_option("--method", o.method, "comma list of gp,sc,ls,cL2,cl2");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial chaos moment and propagation benchmarks"};
  app.require_subcommand(1);

  Overrides o;
  auto* sweep = app.add_subcommand("sweep", "moment error sweep over kappa and methods");
  add_common(sweep, o);
  sweep->add_option("--experiment", o.experiment, "fig-pcerrors | fig-conGPC | fig-conSC");

  auto* ode = app.add_subcommand("ode", "mean/variance tracking for the scalar ODEs");
  add_common(ode, o);
  std::string system = "linear";
  ode->add_option("--system", system, "linear | nonlinear")->check(CLI::IsMember({"linear", "nonlinear"}));

  auto* window = app.add_subcommand("window", "window length study on the linear ODE");
  add_common(window, o);

  auto* selftest = app.add_subcommand("selftest", "run the invariant suites and print a JSON report");
  std::optional<std::uint64_t> selftest_seed;
  selftest->add_option("--seed", selftest_seed, "seed for the random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest) {
      const auto report = selftest_seed ? pce::run_selftest(*selftest_seed) : pce::run_selftest();
      std::cout << report.to_json() << std::endl;
      return report.passed() ? 0 : 1;
    }
    if (*sweep) {
      const auto config = resolve(o, "fig-pcerrors");
      const auto rows = pce::run_moment_sweep(config);
      with_output(config.out, [&](std::ostream& out) { pce::write_sweep_csv(out, config, rows); });
      return 0;
    }
    if (*ode) {
      const auto config = resolve(o, "ode-" + system);
      const auto result = pce::run_ode_experiment(config);
      with_output(config.out, [&](std::ostream& out) { pce::write_ode_csv(out, config, result); });
      with_output(sibling(config.out, "_summary"),
                  [&](std::ostream& out) { pce::write_ode_summary_csv(out, config, result); });
      return 0;
    }
    if (*window) {
      const auto config = resolve(o, "window-sweep");
      const auto rows = pce::run_window_sweep(config);
      with_output(config.out, [&](std::ostream& out) { pce::write_window_csv(out, config, rows); });
      return 0;
    }
  } catch (const pce::Error& e) {
    std::cerr << "pcbench: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
