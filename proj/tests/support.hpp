#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "burgers/ensemble.hpp"
#include "burgers/field.hpp"
#include "burgers/observables.hpp"

namespace testing {

using namespace burgers;
inline constexpr double kPi = std::numbers::pi;

// Band-limited zero-mean field with Gaussian modes 1..kmax of size ~1/k.
inline Field random_field(std::size_t n, long kmax, std::uint64_t seed, double decay = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> c(n / 2 + 1);
  for (long k = 1; k <= kmax; ++k) c[static_cast<std::size_t>(k)] = Complex{g(rng), g(rng)} / std::pow(k, decay);
  return Field::from_coeffs(n, std::move(c));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("burgers_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Stats over nu in {1e-3, 10^-2.5, 1e-2, 10^-1.5} that follow every law of the
// target table exactly. spectrum_slope replaces the k exponent of E(k).
inline EnsembleStats synthetic_stats(double spectrum_slope = -2.0, double K = 5.0) {
  EnsembleStats stats;
  const RangeSpec rs{K};
  auto put = [&](const std::string& obs, double nu, std::map<std::string, double> params, double v) {
    stats.set(StatKey{obs, nu, std::move(params)}, Accumulator::from_moments(16, v, 1e-4 * v * v));
  };
  for (double nu : {1e-3, std::pow(10.0, -2.5), 1e-2, std::pow(10.0, -1.5)}) {
    put(obs::kEnergy, nu, {}, 0.3);
    put(obs::kW11, nu, {}, 4.0);
    put(obs::kX, nu, {}, 12.0);
    put(obs::kH1, nu, {}, 0.5 / nu);
    put(obs::kH2, nu, {}, 2.0 / (nu * nu * nu));
    put(obs::kHs, nu, {{"s", 0.5}}, 1.0 + 0.7 * std::abs(std::log(nu)));
    put(obs::kHs, nu, {{"s", 0.75}}, 3.0 / std::sqrt(nu));
    put(obs::kHs, nu, {{"s", 0.25}}, 0.8);
    put(obs::kNorm, nu, {{"m", 0}, {"p", kInfinity}, {"alpha", 1}}, 0.9);
    put(obs::kNorm, nu, {{"m", 1}, {"p", kInfinity}, {"alpha", 1}}, 0.2 / nu);
    put(obs::kNorm, nu, {{"m", 2}, {"p", 1.0}, {"alpha", 1}}, 0.3 / nu);

    const double a = rs.c1() * nu;  // J1 top
    const double b = rs.c2();       // J2 top
    auto sf = [&](double ell) {
      const double s2 = ell <= a ? ell * ell / a : ell;
      const double s4 = ell <= a ? s2 * s2 / a : s2 * s2 / ell;
      put(obs::kStructure, nu, {{"ell", ell}, {"p", 2}, {"alpha", 1}}, s2);
      put(obs::kStructure, nu, {{"ell", ell}, {"p", 4}, {"alpha", 1}}, s4);
    };
    for (int i = 1; i <= 8; ++i) sf(a / 2.0 * std::pow(2.0, -i + 1));
    if (nu <= rs.nu0()) {
      for (int i = 0; i < 8; ++i) sf(2.0 * a * std::pow(b / (4.0 * a), (i + 0.5) / 8.0));
      for (double m : {2.0, 4.0, 8.0}) {
        for (int i = 0; i < 8; ++i) {
          const double k = std::round(2.0 / b * std::pow(b / (4.0 * a), (i + 0.5) / 8.0));
          put(obs::kSpectrum, nu, {{"k", k}, {"M", m}}, 5.0 * std::pow(k, spectrum_slope));
        }
      }
    }
  }
  return stats;
}

}  // namespace testing
