#include <doctest.h>

#include <fstream>
#include <sstream>

#include "burgers/errors.hpp"
#include "burgers/run_config.hpp"
#include "support.hpp"

using namespace testing;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::from(ConfigDoc::parse(in));
}

}  // namespace

TEST_SUITE("run_config") {

TEST_CASE("defaults") {
  const auto c = parse("");
  CHECK(c.sim.nu == 0.01);
  CHECK(c.sweep == std::vector<double>{0.01});
  CHECK(c.sim_for(1e-3).n_points == 16384);
  CHECK(c.window.t0 == doctest::Approx(20.0));
  CHECK(c.window.burn_in == doctest::Approx(42.0));
  CHECK(c.window.t_start == doctest::Approx(42.0));
  CHECK(c.i0() == doctest::Approx(1.0));
  CHECK(c.K == 5.0);
  CHECK(c.target_table().size() == builtin_targets().size());
}

TEST_CASE("values, lists, comments and quotes") {
  const auto c = parse(
      "# sweep\n"
      "sweep.nu = [1e-2, 0.0031622776601683794, 1e-3]   # three points\n"
      "run.name = \"my#run\"\n"
      "forcing.i0_target = 2\n"
      "window.T0 = 5\n"
      "observables.ks = [1, 2, 3]\n"
      "analysis.targets = spectrum, flatness\n"
      "analysis.tolerance.spectrum = 0.5\n");
  CHECK(c.sweep.size() == 3);
  CHECK(c.name == "my#run");
  CHECK(c.i0() == doctest::Approx(2.0));
  CHECK(c.window.t0 == 5.0);
  CHECK(c.window.burn_in == 12.0);
  CHECK(c.plan.ks == std::vector<long>{1, 2, 3});
  CHECK(c.ensemble_for(1e-2).plan.ks == std::vector<long>{1, 2, 3});
  CHECK(c.tolerances.at("spectrum") == 0.5);
  CHECK(c.target_table().size() == 4);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(parse("solver.nuu = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.nu\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.nu = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.nu = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.n = 1024\nsolver.nu = 0.01\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.dt = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse("solver.flux = cubic\n"), ConfigError);
  CHECK_THROWS_AS(parse("window.T0 = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse("window.t_start = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("analysis.targets = nothing\n"), ConfigError);
  CHECK_THROWS_AS(parse("analysis.tolerance.nothing = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("forcing.profile = explicit\nforcing.b = [1, -1]\n"), ConfigError);
  CHECK_THROWS_AS(parse("forcing.i0_target = 0\n"), ConfigError);  // auto T0 needs I0 > 0
  CHECK_THROWS_AS(RunConfig::from(ConfigDoc::load("/nonexistent/run.cfg")), ConfigError);
  try {
    ConfigDoc::load("/nonexistent/run.cfg");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/run.cfg") != std::string::npos);
  }
}

TEST_CASE("overrides beat file values and the effective config round-trips") {
  std::istringstream in("solver.nu = 0.05\nrun.realizations = 3\n");
  auto doc = ConfigDoc::parse(in);
  doc.set_assignment("solver.nu=0.02");
  const auto c = RunConfig::from(doc);
  CHECK(c.sim.nu == 0.02);
  CHECK(c.realizations == 3);
  std::stringstream out;
  c.write(out);
  const auto again = RunConfig::from(ConfigDoc::parse(out));
  CHECK(again.effective == c.effective);
  CHECK(fingerprint(again.ensemble_for(0.02)) == fingerprint(c.ensemble_for(0.02)));
}

}  // TEST_SUITE
