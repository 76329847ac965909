#pragma once

#include <span>
#include <vector>

#include "burgers/field.hpp"
#include "burgers/solver.hpp"

namespace burgers {

/// Half-open interval (lo, hi] in the increment length.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x > lo && x <= hi; }
  bool empty() const { return !(hi > lo); }
};

/// Range constants derived from the event constant K:
///   nu0 = K^-2 / 6,  C1 = K^-2 / 4,  C2 = K^-4 / 20.
struct RangeSpec {
  double K = 5.0;

  double nu0() const { return 1.0 / (6.0 * K * K); }
  double c1() const { return 1.0 / (4.0 * K * K); }
  double c2() const { return 1.0 / (20.0 * K * K * K * K); }
  void validate() const;
};

struct Ranges {
  Interval dissipation;  // J1 = (0, C1 nu]
  Interval inertial;     // J2 = (C1 nu, C2]
  Interval energy;       // J3 = (C2, 1]
};

/// Throws ViscosityTooLarge when nu > nu0.
Ranges classify_ranges(double nu, const RangeSpec& spec);

struct SpectrumSpec {
  double M = 4.0;
  void validate() const;
};

/// Grid maximum of u_x.
double max_slope(const Field& field);

/// X_t: max of max_slope over the snapshots in [t, t+1].
double x_statistic(const Trajectory& traj, double t);
/// Same, over the per-step observable records.
double x_statistic(std::span<const ObservableRecord> records, double t);

enum class ShiftMode {
  Grid,      // l must be a multiple of 1/N; exact index rotation
  Spectral,  // any l, via a Fourier phase shift
};

/// integral over [0,1) of |u(x+l) - u(x)|^p.
double structure_function(const Field& field, double p, double ell, ShiftMode mode = ShiftMode::Grid);

/// Table of structure functions: result[i][j] for ells[i], ps[j]. Each shift
/// is computed once for all orders.
std::vector<std::vector<double>> structure_functions(const Field& field, std::span<const double> ells,
                                                     std::span<const double> ps,
                                                     ShiftMode mode = ShiftMode::Grid);

/// F = S4 / S2^2. Throws DegenerateDenominator for S2 < 1e-300.
double flatness(double s4, double s2);

/// Integer modes n >= 1 with n in [k/M, Mk].
std::vector<long> spectral_layer(long k, const SpectrumSpec& spec);

/// Layer average of |u^n|^2 for one field.
double layer_energy(const Field& field, long k, const SpectrumSpec& spec);

/// Layer average over the collection.
double energy_spectrum(std::span<const Field> fields, long k, const SpectrumSpec& spec);

/// Per-sample quantities entering the event conditions, with a quadrature
/// weight for the time average.
struct EventSample {
  double weight = 1.0;
  double linf = 0.0;       // |u|_inf
  double max_slope = 0.0;  // max u_x
  double w1inf = 0.0;      // |u|_{1,inf}
  double w2inf = 0.0;      // |u|_{2,inf}
};

EventSample event_sample(const Field& field, double weight = 1.0);

/// Does the sample satisfy
///   K^-1 <= |u|_inf <= max u_x <= K,
///   K^-1 nu^-1 <= |u|_{1,inf} <= K nu^-1,
///   |u|_{2,inf} <= K nu^-2 ?
bool in_event(const EventSample& s, double nu, double K);

/// Weighted fraction of samples in the event set. Zero for an empty set.
double event_fraction(std::span<const EventSample> samples, double nu, double K);

}  // namespace burgers
