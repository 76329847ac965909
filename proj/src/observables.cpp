#include "burgers/observables.hpp"

#include <algorithm>
#include <cmath>

#include "burgers/errors.hpp"
#include "burgers/norms.hpp"

namespace burgers {

namespace {

constexpr double kTimeTol = 1e-9;

// |a - b|^p, with the p = 1, 2, 4 cases kept exact.
double abs_pow(double d, double p) {
  const double a = std::abs(d);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 4.0) return (a * a) * (a * a);
  return std::pow(a, p);
}

std::vector<double> increments(const Field& field, double ell, ShiftMode mode) {
  const std::size_t n = field.n_points();
  const auto u = field.samples();
  std::vector<double> d(n);
  const double shift = ell * static_cast<double>(n);
  const double whole = std::round(shift);
  if (mode == ShiftMode::Grid) {
    if (std::abs(shift - whole) > 1e-9 * std::max(1.0, shift)) {
      throw Error("structure_function: l = " + std::to_string(ell) + " is not a multiple of the grid spacing");
    }
    const auto r = static_cast<std::size_t>(whole) % n;
    for (std::size_t j = 0; j < n; ++j) d[j] = u[(j + r) % n] - u[j];
  } else {
    const Field s = shifted(field, ell);
    const auto v = s.samples();
    for (std::size_t j = 0; j < n; ++j) d[j] = v[j] - u[j];
  }
  return d;
}

}  // namespace

void RangeSpec::validate() const {
  if (!(K > 0.0) || !std::isfinite(K)) throw ConfigError("ranges.K must be positive");
}

Ranges classify_ranges(double nu, const RangeSpec& spec) {
  spec.validate();
  if (!(nu > 0.0)) throw Error("classify_ranges: nu must be positive");
  if (nu > spec.nu0() * (1.0 + 1e-12)) {
    throw ViscosityTooLarge("nu = " + std::to_string(nu) + " exceeds nu0 = " + std::to_string(spec.nu0()) +
                            " for K = " + std::to_string(spec.K));
  }
  const double a = spec.c1() * nu;
  const double b = spec.c2();
  return {{0.0, a}, {a, b}, {b, 1.0}};
}

void SpectrumSpec::validate() const {
  if (!(M >= 1.0) || !std::isfinite(M)) throw ConfigError("spectrum.M must be >= 1");
}

double max_slope(const Field& field) {
  const Field ux = derivative(field, 1);
  const auto s = ux.samples();
  if (s.empty()) return 0.0;
  return *std::max_element(s.begin(), s.end());
}

double x_statistic(const Trajectory& traj, double t) {
  if (traj.snapshots.empty()) throw WindowNotCovered("x_statistic: empty trajectory");
  const double first = traj.snapshots.front().t;
  const double last = traj.snapshots.back().t;
  if (first > t + kTimeTol || last < t + 1.0 - kTimeTol) {
    throw WindowNotCovered("x_statistic: snapshots span [" + std::to_string(first) + ", " + std::to_string(last) +
                           "], need [" + std::to_string(t) + ", " + std::to_string(t + 1.0) + "]");
  }
  double x = -kInfinity;
  for (const auto& s : traj.snapshots) {
    if (s.t >= t - kTimeTol && s.t <= t + 1.0 + kTimeTol) x = std::max(x, max_slope(s.field));
  }
  return x;
}

double x_statistic(std::span<const ObservableRecord> records, double t) {
  if (records.empty() || records.front().t > t + kTimeTol || records.back().t < t + 1.0 - kTimeTol) {
    throw WindowNotCovered("x_statistic: records do not cover [" + std::to_string(t) + ", " +
                           std::to_string(t + 1.0) + "]");
  }
  double x = -kInfinity;
  for (const auto& r : records) {
    if (r.t >= t - kTimeTol && r.t <= t + 1.0 + kTimeTol) x = std::max(x, r.max_slope);
  }
  return x;
}

double structure_function(const Field& field, double p, double ell, ShiftMode mode) {
  const double e[] = {ell};
  const double q[] = {p};
  return structure_functions(field, e, q, mode)[0][0];
}

std::vector<std::vector<double>> structure_functions(const Field& field, std::span<const double> ells,
                                                     std::span<const double> ps, ShiftMode mode) {
  for (double p : ps) {
    if (!(p >= 0.0)) throw Error("structure_function: p must be >= 0");
  }
  std::vector<std::vector<double>> out(ells.size(), std::vector<double>(ps.size(), 0.0));
  const double h = field.grid_spacing();
  for (std::size_t i = 0; i < ells.size(); ++i) {
    const double ell = ells[i];
    if (!(ell >= 0.0 && ell <= 1.0)) throw Error("structure_function: l must lie in [0,1]");
    if (ell == 0.0) continue;
    const auto d = increments(field, ell, mode);
    for (std::size_t j = 0; j < ps.size(); ++j) {
      double sum = 0.0;
      for (double v : d) sum += abs_pow(v, ps[j]);
      out[i][j] = sum * h;
    }
  }
  return out;
}

double flatness(double s4, double s2) {
  if (!(s2 >= 1e-300)) throw DegenerateDenominator("flatness: S2 = " + std::to_string(s2) + " below 1e-300");
  return s4 / (s2 * s2);
}

std::vector<long> spectral_layer(long k, const SpectrumSpec& spec) {
  spec.validate();
  if (k < 1) throw Error("energy_spectrum: k must be >= 1");
  const double kd = static_cast<double>(k);
  // small slack so that n = k/M and n = Mk are included despite rounding
  const auto lo = static_cast<long>(std::ceil(kd / spec.M - 1e-9));
  const auto hi = static_cast<long>(std::floor(kd * spec.M + 1e-9));
  std::vector<long> layer;
  for (long n = std::max(1L, lo); n <= hi; ++n) layer.push_back(n);
  return layer;
}

double layer_energy(const Field& field, long k, const SpectrumSpec& spec) {
  const auto layer = spectral_layer(k, spec);
  if (layer.empty()) throw EmptyLayer("energy_spectrum: no integer mode in [k/M, Mk] for k = " + std::to_string(k));
  if (layer.back() > dealias_cutoff(field.n_points())) {
    throw Error("energy_spectrum: layer top " + std::to_string(layer.back()) + " exceeds the dealiasing cutoff " +
                std::to_string(dealias_cutoff(field.n_points())));
  }
  // +n and -n contribute the same |u^n|^2, so the average over both signs is
  // the average over n > 0.
  double sum = 0.0;
  for (long n : layer) sum += std::norm(field.coeff(n));
  return sum / static_cast<double>(layer.size());
}

double energy_spectrum(std::span<const Field> fields, long k, const SpectrumSpec& spec) {
  if (fields.empty()) throw Error("energy_spectrum: empty collection");
  double sum = 0.0;
  for (const auto& f : fields) sum += layer_energy(f, k, spec);
  return sum / static_cast<double>(fields.size());
}

EventSample event_sample(const Field& field, double weight) {
  EventSample s;
  s.weight = weight;
  s.linf = lp_norm(field.samples(), kInfinity);
  const Field ux = derivative(field, 1);
  const auto d = ux.samples();
  s.max_slope = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
  s.w1inf = lp_norm(d, kInfinity);
  s.w2inf = lp_norm(derivative(field, 2).samples(), kInfinity);
  return s;
}

bool in_event(const EventSample& s, double nu, double K) {
  const double inv = 1.0 / K;
  // |u|_inf <= max u_x holds exactly for zero-mean periodic u; allow round-off
  const bool amplitude = inv <= s.linf && s.linf <= s.max_slope * (1.0 + 1e-9) && s.max_slope <= K;
  const bool slope = inv / nu <= s.w1inf && s.w1inf <= K / nu;
  const bool curvature = s.w2inf <= K / (nu * nu);
  return amplitude && slope && curvature;
}

double event_fraction(std::span<const EventSample> samples, double nu, double K) {
  double total = 0.0;
  double hit = 0.0;
  for (const auto& s : samples) {
    total += s.weight;
    if (in_event(s, nu, K)) hit += s.weight;
  }
  return total > 0.0 ? hit / total : 0.0;
}

}  // namespace burgers
