#include <doctest.h>

#include "burgers/errors.hpp"
#include "burgers/norms.hpp"
#include "burgers/observables.hpp"
#include "burgers/solver.hpp"
#include "support.hpp"

using namespace testing;

namespace {

Field sine(std::size_t n, double sign = 1.0) {
  return Field::from_function(n, [&](double x) { return sign * std::sin(2 * kPi * x); });
}

// Periodic sawtooth 1/2 - x, taking the midpoint value 0 at the jump.
Field sawtooth(std::size_t n) {
  return Field::from_function(n, [](double x) { return x == 0.0 ? 0.0 : 0.5 - x; });
}

// Exact integral of |u(x+l) - u(x)|^p for the sawtooth: the increment is -l on
// a set of measure 1-l and 1-l on a set of measure l.
double sawtooth_sf(double p, double ell) { return (1 - ell) * std::pow(ell, p) + ell * std::pow(1 - ell, p); }

Trajectory two_snapshots(const Field& a, const Field& b, double t) {
  Trajectory tr;
  tr.snapshots.push_back({t, a});
  tr.snapshots.push_back({t + 1.0, b});
  return tr;
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("max slope") {
  CHECK(max_slope(sine(64)) == doctest::Approx(2 * kPi).epsilon(1e-13));
  CHECK(max_slope(sine(64, -1.0)) == doctest::Approx(2 * kPi).epsilon(1e-13));
  CHECK(max_slope(Field::zero(64)) == 0.0);
}

TEST_CASE("X statistic") {
  CHECK(x_statistic(two_snapshots(sine(64), Field::zero(64), 3.0), 3.0) == doctest::Approx(2 * kPi));
  CHECK(x_statistic(two_snapshots(Field::zero(64), Field::zero(64), 0.0), 0.0) == 0.0);
  CHECK_THROWS_AS(x_statistic(two_snapshots(sine(64), Field::zero(64), 0.0), 0.5), WindowNotCovered);

  // a finer stride is a superset of snapshots and never decreases the value
  SimConfig cfg;
  cfg.nu = 0.05;
  cfg.n_points = 512;
  cfg.t_end = 2.0;
  cfg.snapshot_stride = 0.05;
  const auto fine = run(cfg, SeedStream(4, 0));
  Trajectory coarse;
  for (std::size_t i = 0; i < fine.snapshots.size(); i += 4) coarse.snapshots.push_back(fine.snapshots[i]);
  CHECK(x_statistic(fine, 0.5) >= x_statistic(coarse, 0.5));
  CHECK(x_statistic(fine.records, 0.5) >= x_statistic(fine, 0.5) - 1e-12);
}

TEST_CASE("structure functions of closed-form fields") {
  const auto saw = sawtooth(10000);
  CHECK(structure_function(saw, 2.0, 0.1) == doctest::Approx(0.09).epsilon(1e-3));
  for (double ell : {0.01, 0.1, 0.25, 0.5}) {
    CHECK(structure_function(saw, 2.0, ell) == doctest::Approx(sawtooth_sf(2.0, ell)).epsilon(2e-3));
    CHECK(structure_function(saw, 4.0, ell) == doctest::Approx(sawtooth_sf(4.0, ell)).epsilon(2e-3));
  }
  const auto s = sine(256);
  for (int j : {1, 7, 64, 100}) {
    const double ell = j / 256.0;
    const double expected = 2 * std::pow(std::sin(kPi * ell), 2);
    CHECK(structure_function(s, 2.0, ell) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(structure_function(s, 2.0, ell, ShiftMode::Spectral) == doctest::Approx(expected).epsilon(1e-12));
  }
  // off-grid l needs the spectral shift
  CHECK(structure_function(s, 2.0, 0.0123, ShiftMode::Spectral) ==
        doctest::Approx(2 * std::pow(std::sin(kPi * 0.0123), 2)).epsilon(1e-12));
  CHECK_THROWS(structure_function(s, 2.0, 0.0123, ShiftMode::Grid));
  for (double p : {0.5, 1.0, 2.0, 4.0}) CHECK(structure_function(random_field(64, 20, 1), p, 0.0) == 0.0);
}

TEST_CASE("flatness") {
  const auto s = sine(256);
  for (int j : {3, 40, 128}) {
    const double ell = j / 256.0;
    const auto t = structure_functions(s, std::vector<double>{ell}, std::vector<double>{2.0, 4.0});
    CHECK(t[0][1] == doctest::Approx(6 * std::pow(std::sin(kPi * ell), 4)).epsilon(1e-12));
    CHECK(flatness(t[0][1], t[0][0]) == doctest::Approx(1.5).epsilon(1e-12));
  }
  // oracle: exact sawtooth integrals at l = 0.1 give 0.0657 / 0.0081
  const double oracle = sawtooth_sf(4.0, 0.1) / std::pow(sawtooth_sf(2.0, 0.1), 2);
  CHECK(oracle == doctest::Approx(8.111).epsilon(1e-4));
  const auto saw = sawtooth(10000);
  CHECK(flatness(structure_function(saw, 4.0, 0.1), structure_function(saw, 2.0, 0.1)) ==
        doctest::Approx(oracle).epsilon(2e-3));
  CHECK(flatness(0.04, 0.2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(flatness(1.0, 0.0), DegenerateDenominator);
}

TEST_CASE("Wiener-Khinchin identity") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto f = random_field(256, 80, seed);
    for (int j : {1, 5, 33, 128, 200}) {
      const double y = j / 256.0;
      double spectral = 0.0;
      for (long n = 1; n <= 128; ++n) {
        const double w = (n == 128) ? 1.0 : 2.0;  // both signs of n
        spectral += w * 4 * std::pow(std::sin(kPi * n * y), 2) * std::norm(f.coeff(n));
      }
      CHECK(structure_function(f, 2.0, y) == doctest::Approx(spectral).epsilon(1e-10));
    }
  }
}

TEST_CASE("structure functions are translation and reflection invariant") {
  const auto f = random_field(128, 40, 2);
  const auto g = shifted(f, 17.0 / 128.0);
  for (int j : {1, 9, 50}) {
    const double ell = j / 128.0;
    for (double p : {1.0, 2.0, 4.0}) {
      const double a = structure_function(f, p, ell);
      CHECK(structure_function(g, p, ell) == doctest::Approx(a).epsilon(1e-11));
      CHECK(structure_function(f, p, 1.0 - ell) == doctest::Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy spectrum layers") {
  const auto s = sine(64);
  CHECK(energy_spectrum(std::vector<Field>{s}, 1, SpectrumSpec{2.0}) == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  CHECK(energy_spectrum(std::vector<Field>{s}, 1, SpectrumSpec{1.0}) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(energy_spectrum(std::vector<Field>{Field::zero(64)}, 3, SpectrumSpec{4.0}) == 0.0);

  const auto f = random_field(256, 80, 5);
  for (long k = 1; k <= 40; ++k) {
    CHECK(layer_energy(f, k, SpectrumSpec{1.0}) == doctest::Approx(std::norm(f.coeff(k))).epsilon(1e-14));
    for (double m : {1.5, 2.0, 2.0 + 1e-3}) CHECK(layer_energy(f, k, SpectrumSpec{m}) >= 0.0);
  }
  CHECK(spectral_layer(5, SpectrumSpec{2.0}) == std::vector<long>{3, 4, 5, 6, 7, 8, 9, 10});
  CHECK_THROWS(layer_energy(f, 30, SpectrumSpec{4.0}));  // above the cutoff
  CHECK_THROWS_AS(SpectrumSpec{0.5}.validate(), ConfigError);
}

TEST_CASE("range classification") {
  const auto r = classify_ranges(1e-3, RangeSpec{5.0});
  CHECK(r.dissipation.lo == 0.0);
  CHECK(r.dissipation.hi == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(r.inertial.lo == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(r.inertial.hi == doctest::Approx(8e-5).epsilon(1e-12));
  CHECK(r.energy.lo == doctest::Approx(8e-5).epsilon(1e-12));
  CHECK(r.energy.hi == 1.0);

  const RangeSpec spec{5.0};
  const auto edge = classify_ranges(spec.nu0(), spec);
  CHECK_FALSE(edge.dissipation.empty());
  CHECK_FALSE(edge.inertial.empty());
  CHECK_FALSE(edge.energy.empty());
  CHECK(edge.dissipation.hi <= edge.inertial.lo);
  CHECK(edge.inertial.hi <= edge.energy.lo);
  CHECK_THROWS_AS(classify_ranges(spec.nu0() * 1.01, spec), ViscosityTooLarge);

  for (double K : {1.5, 3.0, 5.0, 8.0}) {
    const RangeSpec k{K};
    CHECK(k.c1() <= 0.25 / (K * K) * (1 + 1e-15));
    CHECK(5 * K * K <= k.c1() / k.c2() * (1 + 1e-12));
    CHECK(k.c1() / k.c2() < 1.0 / k.nu0());
  }
}

TEST_CASE("event fraction") {
  CHECK(event_fraction(std::vector<EventSample>{}, 1e-2, 5.0) == 0.0);
  const auto zero = event_sample(Field::zero(64));
  CHECK(event_fraction(std::vector<EventSample>{zero, zero}, 1e-2, 5.0) == 0.0);

  std::vector<EventSample> samples;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    samples.push_back(event_sample(random_field(256, 10 + static_cast<long>(seed), seed, 1.2), 0.5 + seed % 3));
  }
  double prev = 0.0;
  for (double K : {1.5, 3.0, 10.0, 100.0, 1e4, 1e8}) {
    const double f = event_fraction(samples, 1e-2, K);
    CHECK(f >= prev);
    prev = f;
  }
  // as K grows only the lower bounds (|u|_inf >= 1/K, |u|_{1,inf} >= 1/(K nu)) remain
  CHECK(prev == 1.0);
  const auto s = event_sample(sine(64));
  CHECK(in_event(s, 0.2, 2 * kPi + 1));
  CHECK_FALSE(in_event(s, 0.2, 6.0));  // max u_x = 2 pi > K
}

}  // TEST_SUITE
