#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "burgers/ensemble.hpp"

namespace burgers {

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  double stderr_y = 0.0;
};

struct FitReport {
  double exponent = 0.0;   // slope (log-log for power laws)
  double intercept = 0.0;  // log prefactor for power laws
  double r2 = 0.0;
  double ci_half_width = 0.0;  // 95% Student t
  std::size_t n_points = 0;
  bool passed = false;
};

/// Weighted least squares of log y on log x. Weights are (y / stderr)^2, the
/// inverse variance of log y; with any stderr equal to zero the fit is
/// unweighted. Needs at least three points with positive values and at
/// least two distinct x.
FitReport fit_power_law(std::span<const FitPoint> points);

/// Same regression on untransformed (x, y).
FitReport fit_linear(std::span<const FitPoint> points);

enum class Predictor { Nu, Ell, Wavenumber, LogNu };

enum class Check {
  Exponent,      // |fitted - predicted| <= tolerance
  LogLaw,        // linear in |log nu| with positive slope and r^2 >= tolerance
  BoundedRatio,  // max / min across the sweep < tolerance
  SameAs,        // |fitted - fitted(reference)| <= tolerance
};

enum class FitRange {
  NuInterval,        // nu in [nu_lo, nu_hi]
  Dissipation,       // l in J1, top octave trimmed
  Inertial,          // l in J2, one octave trimmed at each end
  InertialModes,     // k with 1/k in J2, trimmed likewise
  DissipationPoint,  // l = C1 nu / 2 for each nu in [nu_lo, nu_hi]
};

struct ScalingTarget {
  std::string id;
  std::string observable;  // a stats observable, or "flatness"
  std::map<std::string, double> fixed;  // parameters the entries must carry
  Predictor predictor = Predictor::Nu;
  double predicted = 0.0;
  Check check = Check::Exponent;
  FitRange range = FitRange::NuInterval;
  double nu_lo = 1e-3;
  double nu_hi = 1e-2;
  double at_nu = 0.0;  // viscosity of l/k fits; 0 picks the smallest available
  double K = 5.0;      // range constant for J1/J2
  double root = 1.0;   // values are raised to 1/root before fitting
  std::string reference;
  bool mandatory = true;
  std::string law;  // human-readable relation
};

/// Exponent of {||u||_m^2} in nu.
double sobolev_dissipation_exponent(int m);
/// gamma = max(0, m - 1/p); ({|u|_{m,p}^alpha})^{1/alpha} ~ nu^{-gamma}.
double norm_gamma(int m, double p);
/// l-exponent of S_{p,alpha} in J1 (dissipation = true) or J2.
double structure_ell_exponent(double p, double alpha, bool dissipation);
/// nu-exponent of S_{p,alpha} at fixed l in J1.
double structure_nu_exponent(double p, double alpha);
/// nu-exponent of {||u||_s^2} for s in (0,1), s != 1/2.
double fractional_exponent(double s);

/// The built-in target table. Ranges use the constant K.
std::vector<ScalingTarget> builtin_targets(double K = 5.0, double nu_lo = 1e-3, double nu_hi = 1e-2);
std::map<std::string, double> default_tolerances();

/// Targets whose id equals a requested name or starts with "<name>_".
std::vector<ScalingTarget> select_targets(const std::vector<ScalingTarget>& table, std::span<const std::string> names);

struct TargetResult {
  ScalingTarget target;
  FitReport fit;
  double tolerance = 0.0;
  bool passed = false;
  std::string message;
  std::vector<FitPoint> points;
};

/// Evaluates one target; throws InsufficientData when the stats do not cover
/// its range.
TargetResult evaluate_target(const EnsembleStats& stats, const ScalingTarget& target, double tolerance,
                             const TargetResult* reference = nullptr);

/// One result per target. A target without enough data fails with a message;
/// InsufficientData is raised only when no target could be evaluated.
std::vector<TargetResult> verify_targets(const EnsembleStats& stats, const std::vector<ScalingTarget>& targets,
                                         const std::map<std::string, double>& tolerances);

/// report.csv: target,predicted,fitted,ci,pass (plus r2, points, mandatory, message).
void write_report(std::ostream& out, std::span<const TargetResult> results);
/// curves.csv: target,x,y,stderr.
void write_curves(std::ostream& out, std::span<const TargetResult> results);

}  // namespace burgers
