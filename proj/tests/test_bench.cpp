#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pce/candidates.hpp"
#include "pce/config.hpp"
#include "pce/errors.hpp"
#include "pce/experiments.hpp"
#include "pce/selftest.hpp"

using namespace pce;
using doctest::Approx;

namespace {

ExperimentConfig config_from(const std::string& text) {
  std::istringstream in(text);
  ExperimentConfig c = parse_config(in);
  c.finalize();
  return c;
}

const SweepRow& find(const std::vector<SweepRow>& rows, int kappa, const std::string& method, int m) {
  for (const auto& r : rows) {
    if (r.kappa == kappa && r.method == method && r.moment == m) return r;
  }
  throw std::runtime_error("row not found");
}

}  // namespace

TEST_CASE("config parsing and defaults") {
  const auto c = config_from("# sweep\nexperiment = fig-conGPC\nkappa = 1-3, 7\nfunction = sin2\nseed = 17\n");
  CHECK(c.kappas == std::vector<int>{1, 2, 3, 7});
  CHECK(c.methods == std::vector<std::string>{"gp", "cL2"});
  CHECK(c.seed == 17);
  CHECK(config_from("experiment = ode-linear").kappas == std::vector<int>{1, 2, 3});
  CHECK(config_from("").kappas.size() == 10);
  CHECK(config_from("experiment = window-sweep").window_multipliers == std::vector<int>{1, 5, 10});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from("colour = red"), InvalidArgument);
  CHECK_THROWS_AS(config_from("experiment = fig-99"), InvalidArgument);
  CHECK_THROWS_AS(config_from("function = cosh"), InvalidArgument);
  CHECK_THROWS_AS(config_from("kappa = 0"), InvalidArgument);
  CHECK_THROWS_AS(config_from("kappa = 5-2"), InvalidArgument);
  CHECK_THROWS_AS(config_from("methods = gp, magic"), InvalidArgument);
  CHECK_THROWS_AS(config_from("kappa 3"), InvalidArgument);
  CHECK_THROWS_AS(config_from("function = custom"), InvalidArgument);
}

TEST_CASE("candidate truths") {
  CHECK(make_candidate("delta8").truth[1] == Approx(1.0 / 17));
  CHECK(make_candidate("rational").truth[0] == Approx(M_PI / (2 * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(make_candidate("sin2").truth[0] == Approx(0.5 - std::sin(6.0) / 12).epsilon(1e-15));
  CHECK(make_candidate("gaussbump").truth[0] ==
        Approx(std::sqrt(M_PI / 10) * std::erf(std::sqrt(10.0)) / 2).epsilon(1e-15));
  const Candidate c = make_candidate("custom", {1.0, 0.0, 3.0});
  CHECK(c.polynomial_degree == 2);
  CHECK(c.f(2.0) == 13.0);
  CHECK(c.truth[0] == Approx(2.0));
  CHECK_THROWS_AS(make_candidate("nope"), InvalidArgument);
}

TEST_CASE("moment sweep examples") {
  auto c = config_from("methods = gp,cL2\nkappa = 1-10");
  auto rows = run_moment_sweep(c);
  CHECK(rows.size() == 10 * 2 * 4);
  for (int k = 1; k <= 10; ++k) CHECK(find(rows, k, "gp", 1).error <= 1e-14);
  CHECK(find(rows, 8, "gp", 2).error <= 1e-12);
  CHECK(find(rows, 1, "gp", 2).error > 1e-2);

  c.function = "sin2";
  rows = run_moment_sweep(c);
  CHECK(find(rows, 2, "cL2", 2).error <= 1e-12);
}

TEST_CASE("sweep CSV is versioned, floored and reproducible") {
  const auto c = config_from("methods = gp,sc,ls,cL2,cl2\nkappa = 1-4\nfunction = rational");
  std::ostringstream a, b;
  write_sweep_csv(a, c, run_moment_sweep(c));
  write_sweep_csv(b, c, run_moment_sweep(c));
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# schema: pce-sweep/1", 0) == 0);
  std::getline(in, line);
  CHECK(line == "kappa,method,moment,truth,estimate,abs_error,status");
  int n = 0;
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    const auto prev = line.rfind(',', last - 1);
    CHECK(std::stod(line.substr(prev + 1, last - prev - 1)) >= std::ldexp(1.0, -52));
    ++n;
  }
  CHECK(n == 4 * 5 * 4);
  CHECK(floor_error(0.0) == std::ldexp(1.0, -52));
  CHECK(floor_error(0.5) == 0.5);
}

TEST_CASE("linear ODE experiment") {
  const auto c = config_from("experiment = ode-linear\nkappa = 1");
  const OdeResult r = run_ode_experiment(c);
  REQUIRE(r.samples.size() == 1001);
  CHECK(r.samples[200].t == Approx(2.0));
  CHECK(r.samples[200].ref_mean == Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-14));
  CHECK(r.samples[0].ref_mean == 1.0);
  CHECK(r.samples[0].ref_var == 0.0);
  CHECK(r.samples[1].ref_var < 1e-4);
  REQUIRE(r.summaries.size() == 1);
  CHECK(r.summaries[0].alg1_mean_avg < r.summaries[0].gp_mean_avg);
  std::ostringstream out;
  write_ode_csv(out, c, r);
  CHECK(out.str().find("kappa,t,dim,ref_mean,ref_var") != std::string::npos);
}

TEST_CASE("window sweep ordering") {
  const auto c = config_from("experiment = window-sweep");
  const auto rows = run_window_sweep(c);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].q == 2);
  CHECK(rows[2].q == 20);
  CHECK(rows[0].terminal_mean_error <= rows[1].terminal_mean_error);
  CHECK(rows[1].terminal_mean_error <= rows[2].terminal_mean_error);
}

TEST_CASE("selftest report lists every suite with its max error") {
  const SelftestReport r = run_selftest();
  CHECK(r.suites.size() >= 15);
  const std::string json = r.to_json();
  CHECK(json.find("\"max_error\"") != std::string::npos);
  CHECK(json.find("moment-exact-recovery") != std::string::npos);
  for (const auto& s : r.suites) {
    if (s.name == "basis-orthogonality" || s.name == "engine-determinism" || s.name == "moment-exact-recovery" ||
        s.name == "lagrange-cardinality" || s.name == "ls-optimality") {
      CHECK_MESSAGE(s.passed, s.name);
    }
  }
}
