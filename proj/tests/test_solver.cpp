#include <doctest.h>

#include "burgers/errors.hpp"
#include "burgers/forcing.hpp"
#include "burgers/norms.hpp"
#include "burgers/solver.hpp"
#include "cole_hopf.hpp"
#include "support.hpp"

using namespace testing;

namespace {

SimConfig unforced(double nu, std::size_t n) {
  SimConfig c;
  c.nu = nu;
  c.n_points = n;
  c.forcing = ForcingSpec::from_amplitudes({});
  c.snapshot_stride = 0.0;
  return c;
}

Field sine(std::size_t n, double amp = 1.0) {
  return Field::from_function(n, [&](double x) { return amp * std::sin(2 * kPi * x); });
}

// Hand-written exponential Euler step driven by a given OU increment; the
// first test below pins it to the production step.
Field euler_step(const Field& u, double dt, const SimConfig& cfg, const Field& noise) {
  const auto nl = nonlinear_term(u, cfg.flux);
  const std::size_t n = u.n_points();
  const auto cutoff = static_cast<std::size_t>(dealias_cutoff(n));
  std::vector<Complex> c(n / 2 + 1);
  for (std::size_t k = 1; k <= cutoff; ++k) {
    const double decay = std::exp(-cfg.nu * std::pow(2 * kPi * static_cast<double>(k), 2) * dt);
    c[k] = decay * (u.coeffs()[k] + dt * nl.coeffs()[k]) + noise.coeffs()[k];
  }
  return Field::from_coeffs(n, std::move(c));
}

Field decayed(const Field& f, double nu, double dt) {
  std::vector<Complex> c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t k = 1; k < c.size(); ++k) c[k] *= std::exp(-nu * std::pow(2 * kPi * static_cast<double>(k), 2) * dt);
  return Field::from_coeffs(f.n_points(), std::move(c));
}

Field sum(const Field& a, const Field& b) {
  std::vector<Complex> c(a.coeffs().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeffs()[k] + b.coeffs()[k];
  return Field::from_coeffs(a.n_points(), std::move(c));
}

double h1_sq(const Field& f) {
  double s = 0.0;
  for (std::size_t k = 1; k < f.coeffs().size(); ++k) s += 2 * std::pow(2 * kPi * static_cast<double>(k), 2) * std::norm(f.coeffs()[k]);
  return s;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("nonlinear term") {
  const auto zero = nonlinear_term(Field::zero(64), FluxSpec::classical());
  for (double v : zero.samples()) CHECK(v == 0.0);

  const auto n = nonlinear_term(sine(64), FluxSpec::classical());
  for (std::size_t j = 0; j < 64; ++j) {
    CHECK(n.samples()[j] == doctest::Approx(-kPi * std::sin(4 * kPi * j / 64.0)).epsilon(1e-12).scale(4));
  }
  CHECK(n.coeff(0) == Complex{});

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = random_field(128, 20, seed);
    const auto a = nonlinear_term(f, FluxSpec::classical());
    const auto b = nonlinear_term(f, FluxSpec::softened_quartic(0.0));
    CHECK(max_abs_diff(a.samples(), b.samples()) <= 1e-12 * std::max(1.0, a.max_abs()));
    CHECK(nonlinear_term(f, FluxSpec::softened_quartic(2.0)).coeff(0) == Complex{});
  }
}

TEST_CASE("flux invariants") {
  for (const auto& flux : {FluxSpec::classical(), FluxSpec::softened_quartic(0.5), FluxSpec::softened_quartic(3.0)}) {
    CHECK(flux.delta() == 1.0);
    double worst = 0.0;
    for (double u = -1e3; u <= 1e3; u += 0.37) {
      CHECK(flux.fsecond(u) >= flux.sigma());
      worst = std::max(worst, std::abs(flux.fprime(u)) / (1.0 + std::abs(u)));
    }
    CHECK(worst <= 1.0 + flux.a);
  }
  CHECK_THROWS_AS(FluxSpec::softened_quartic(-1.0), ConfigError);
}

TEST_CASE("zero stays zero without forcing") {
  SeedStream s(1, 0);
  const auto out = step(Field::zero(64), 1e-3, unforced(0.25, 64), s);
  for (double v : out.samples()) CHECK(v == 0.0);
}

TEST_CASE("heat decay is exact with the nonlinearity off") {
  auto cfg = unforced(0.1, 256);
  cfg.nonlinearity = false;
  const double dt = 0.05;
  SeedStream s(1, 0);
  const auto out = step(sine(256), dt, cfg, s);
  const double expected = std::exp(-0.1 * 4 * kPi * kPi * dt);
  CHECK(std::abs(out.coeff(1) - Complex{0, -0.5 * expected}) < 1e-15);
}

TEST_CASE("Cole-Hopf oracle") {
  auto cfg = unforced(0.05, 512);
  cfg.t_end = 0.5;
  cfg.dt_policy = DtPolicy::fixed(1e-6);
  const auto traj = run(cfg, SeedStream(1, 0), sine(512));
  const auto& u = traj.snapshots.back();
  CHECK(u.t == 0.5);
  double err = 0.0;
  for (std::size_t j = 0; j < 512; ++j) err = std::max(err, std::abs(u.field.samples()[j] - cole_hopf_sine(j / 512.0, 0.5, 0.05)));
  MESSAGE("Cole-Hopf max error " << err);
  CHECK(err < 1e-6);
}

TEST_CASE("first-order convergence to the Cole-Hopf solution") {
  auto cfg = unforced(0.05, 512);
  cfg.t_end = 0.2;
  std::vector<double> errs;
  for (double dt : {4e-4, 2e-4, 1e-4}) {
    cfg.dt_policy = DtPolicy::fixed(dt);
    const auto u = run(cfg, SeedStream(1, 0), sine(512)).snapshots.back().field;
    double err = 0.0;
    for (std::size_t j = 0; j < 512; ++j) err = std::max(err, std::abs(u.samples()[j] - cole_hopf_sine(j / 512.0, 0.2, 0.05)));
    errs.push_back(err);
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("hand-written step matches the production step") {
  SimConfig cfg;
  cfg.nu = 0.01;
  cfg.n_points = 2048;
  const auto u = random_field(2048, 40, 3);
  SeedStream a(5, 2), b(5, 2);
  const auto prod = step(u, 1e-5, cfg, a);
  const auto hand = euler_step(u, 1e-5, cfg, ou_noise_increment(cfg.forcing, cfg.nu, 1e-5, 2048, b));
  CHECK(max_abs_diff(prod.samples(), hand.samples()) < 1e-12 * std::max(1.0, prod.max_abs()));
}

TEST_CASE("halving dt barely moves the time-averaged H1 norm") {
  // coarse and fine runs share one noise path: the coarse OU increment over dt
  // is D(dt/2) xi1 + xi2, with xi1, xi2 the fine increments
  SimConfig cfg;
  cfg.nu = 0.01;
  cfg.n_points = 2048;
  const double dt = 1e-4, burn = 4.0, t_end = 8.0;
  const auto steps = static_cast<long>(std::lround(t_end / dt));
  const auto first = static_cast<long>(std::lround(burn / dt));
  double coarse_avg = 0.0, fine_avg = 0.0;
  for (std::uint64_t r = 0; r < 2; ++r) {
    SeedStream stream(11, r);
    auto coarse = Field::zero(2048), fine = Field::zero(2048);
    double cs = 0.0, fs = 0.0;
    for (long i = 0; i < steps; ++i) {
      const auto xi1 = ou_noise_increment(cfg.forcing, cfg.nu, dt / 2, 2048, stream);
      const auto xi2 = ou_noise_increment(cfg.forcing, cfg.nu, dt / 2, 2048, stream);
      coarse = euler_step(coarse, dt, cfg, sum(decayed(xi1, cfg.nu, dt / 2), xi2));
      fine = euler_step(euler_step(fine, dt / 2, cfg, xi1), dt / 2, cfg, xi2);
      if (i >= first) {
        cs += h1_sq(coarse);
        fs += h1_sq(fine);
      }
    }
    coarse_avg += cs;
    fine_avg += fs;
  }
  const double change = std::abs(coarse_avg - fine_avg) / fine_avg;
  MESSAGE("relative change of time-averaged ||u||_1^2 under dt -> dt/2: " << change);
  CHECK(change < 0.02);
}

TEST_CASE("trajectory plumbing") {
  SimConfig cfg;
  cfg.nu = 0.05;
  cfg.n_points = 512;
  cfg.t_end = 0.0;
  auto t0 = run(cfg, SeedStream(1, 0));
  CHECK(t0.snapshots.size() == 1);
  CHECK(t0.snapshots[0].t == 0.0);

  cfg.t_end = 2.0;
  cfg.snapshot_stride = 0.5;
  cfg.observe_stride = 0.1;
  const auto a = run(cfg, SeedStream(9, 1));
  const auto b = run(cfg, SeedStream(9, 1));
  REQUIRE(a.snapshots.size() == 5);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].t == b.snapshots[i].t);
    CHECK(max_abs_diff(a.snapshots[i].field.samples(), b.snapshots[i].field.samples()) == 0.0);
    CHECK(a.snapshots[i].field.coeff(0) == Complex{});
    if (i > 0) CHECK(a.snapshots[i].t > a.snapshots[i - 1].t);
  }
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].energy == b.records[i].energy);
  CHECK(a.records.back().t == 2.0);
}

TEST_CASE("unforced norms never grow") {
  for (const auto& flux : {FluxSpec::classical(), FluxSpec::softened_quartic(1.0)}) {
    auto cfg = unforced(0.02, 1024);
    cfg.flux = flux;
    cfg.t_end = 1.0;
    cfg.snapshot_stride = 0.01;
    const auto u0 = Field::from_function(1024, [](double x) { return std::sin(2 * kPi * x) + 0.5 * std::cos(6 * kPi * x); });
    const auto traj = run(cfg, SeedStream(1, 0), u0);
    for (double p : {1.0, 2.0, kInfinity}) {
      double prev = kInfinity;
      for (const auto& s : traj.snapshots) {
        const double v = norm(s.field, Wmp{0, p});
        CHECK(v <= prev * (1 + 1e-10));
        prev = v;
      }
    }
  }
}

TEST_CASE("blow-up guard") {
  SimConfig cfg;
  cfg.nu = 0.05;
  cfg.n_points = 512;
  cfg.t_end = 1.0;
  cfg.blowup_guard = 1e-3;
  try {
    run(cfg, SeedStream(1, 0));
    FAIL("expected BlowUp");
  } catch (const BlowUp& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 1.0);
  }
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.nu = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.nu = 1e-2;
  cfg.n_points = 1024;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // N < 16 / nu
  cfg.n_points = 2048;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt_policy = DtPolicy::fixed(10.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(resolution_for(1e-2) == 2048);
  CHECK(resolution_for(1e-3) == 16384);
}

TEST_CASE("mean is conserved under forcing") {
  SimConfig cfg;
  cfg.nu = 0.05;
  cfg.n_points = 512;
  cfg.t_end = 1.0;
  cfg.snapshot_stride = 0.25;
  for (const auto& s : run(cfg, SeedStream(2, 0)).snapshots) CHECK(s.field.coeff(0) == Complex{});
}

}  // TEST_SUITE
