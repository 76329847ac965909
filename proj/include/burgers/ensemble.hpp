#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burgers/field.hpp"
#include "burgers/norms.hpp"
#include "burgers/observables.hpp"
#include "burgers/solver.hpp"

namespace burgers {

/// Averaging window [t_start, t_start + T0] of the bracket, after a burn-in.
struct BracketWindow {
  double t0 = 20.0;
  double burn_in = 42.0;
  double t_start = 42.0;

  /// T0 = 20 / I0 and burn-in 2 T0 + 2, starting right after the burn-in.
  static BracketWindow defaults(double i0);
  double t_end() const { return t_start + t0; }
  void validate() const;
};

/// Mean and variance accumulator (Welford updates, Chan merges).
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const;
  double stderr_of_mean() const;

  static Accumulator from_moments(std::size_t n, double mean, double variance);

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Identifies one bracketed quantity: observable name, viscosity and the
/// parameters it depends on (l, p, alpha, k, M, m, s, K, ...).
struct StatKey {
  std::string observable;
  double nu = 0.0;
  std::map<std::string, double> params;

  auto operator<=>(const StatKey&) const = default;
  bool operator==(const StatKey&) const = default;

  std::optional<double> param(const std::string& name) const;
  /// Canonical "name=value;name=value" form, sorted by name.
  std::string params_string() const;
  static std::map<std::string, double> parse_params(const std::string& text);
};

class EnsembleStats {
 public:
  void add(const StatKey& key, double value) { entries_[key].add(value); }
  void set(const StatKey& key, const Accumulator& acc) { entries_[key] = acc; }
  void merge(const EnsembleStats& other);

  const Accumulator* find(const StatKey& key) const;
  const Accumulator& at(const StatKey& key) const;
  const std::map<StatKey, Accumulator>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Distinct viscosities carrying the given observable.
  std::vector<double> viscosities(const std::string& observable) const;
  /// Entries of one observable at one viscosity.
  std::vector<std::pair<StatKey, Accumulator>> select(const std::string& observable, double nu) const;

  /// CSV with columns observable,nu,params,count,mean,variance,stderr.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  static EnsembleStats read_csv(std::istream& in);
  static EnsembleStats read_csv(const std::filesystem::path& path);

 private:
  std::map<StatKey, Accumulator> entries_;
};

/// A scalar time series of one realization.
struct Series {
  std::vector<double> t;
  std::vector<double> value;
};

/// (1/T0) times the trapezoid integral of the series over the window, with
/// linear interpolation at window ends falling between samples.
double window_average(const Series& series, double t_start, double t0);

/// Time average per realization, then the ensemble mean. stderr follows from
/// the between-realization variance.
Accumulator bracket(std::span<const Series> realizations, const BracketWindow& window);

/// What is sampled inside the bracket window.
struct ObservablePlan {
  double observe_stride = 0.01;  // cheap observables, norms, X_t records
  double sample_stride = 0.1;    // structure functions, spectra, events

  std::vector<double> ells;  // empty: no structure functions
  std::vector<double> ps = {2.0, 4.0};
  std::vector<double> alphas = {1.0};
  ShiftMode shift = ShiftMode::Spectral;

  std::vector<long> ks;  // empty: no spectrum
  std::vector<double> spectrum_M = {4.0};

  std::vector<double> sobolev_s = {0.25, 0.5, 0.75};
  struct NormTerm {
    int m;
    double p;
    double alpha;
  };
  std::vector<NormTerm> norms = {{0, kInfinity, 1.0}, {1, 1.0, 1.0}, {1, kInfinity, 1.0}, {2, 1.0, 1.0}};
  std::vector<double> event_K = {10.0};
  bool x_statistic = true;

  void validate(std::size_t n_points) const;
};

/// Increment lengths covering the dissipation, inertial and energy ranges on
/// an n-point grid: geometric grid multiples up to 1/2, plus off-grid points
/// inside the ranges of each K when nu is small enough for them to exist.
std::vector<double> default_ells(std::size_t n_points, double nu, std::span<const double> range_K);
/// Roughly geometric wavenumbers with M k within the dealiasing cutoff.
std::vector<long> default_ks(std::size_t n_points, double max_M);

/// Bracketed values of one realization, keyed like EnsembleStats.
using RealizationSummary = std::map<StatKey, double>;

struct RealizationResult {
  std::size_t index = 0;
  RealizationSummary summary;
  std::vector<ObservableRecord> records;
};

/// Where and how realizations are persisted.
struct OutputOptions {
  std::optional<std::filesystem::path> nu_dir;  // runs/<name>/nu=<val>
  bool write_snapshots = false;
  bool reuse_completed = false;  // load real=<idx>/summary.csv when present
};

struct EnsembleConfig {
  SimConfig sim;
  BracketWindow window;
  ObservablePlan plan;
  std::uint64_t master_seed = 1;
  std::size_t realizations = 1;
  std::size_t jobs = 1;
};

/// observables.csv: t,energy,h1_sq,h2_sq,linf,w11,max_slope.
void write_records(const std::filesystem::path& path, std::span<const ObservableRecord> records);

/// Stable hash of every field that influences a realization's summary.
std::string fingerprint(const EnsembleConfig& config);

/// Simulates realization `index` from u = 0 through the window and brackets
/// every planned observable in time.
RealizationResult run_realization(const EnsembleConfig& config, std::size_t index,
                                  const OutputOptions& out = {});

/// Result of the stationarity check on |u|_2^2: the half-window means agree
/// within two standard errors of their paired difference.
struct GateResult {
  bool evaluated = false;  // needs at least two realizations
  bool passed = true;
  double first_half = 0.0;
  double second_half = 0.0;
  double stderr_of_difference = 0.0;
  std::string describe() const;
};

struct EnsembleResult {
  EnsembleStats stats;
  GateResult gate;
};

/// R independent realizations on a pool of `jobs` workers, merged in
/// realization-index order. A BlowUp carries the index of the failing
/// realization (the lowest one if several fail).
EnsembleResult run_ensemble(const EnsembleConfig& config, const OutputOptions& out = {},
                            const std::function<void(std::size_t)>& on_done = {});

GateResult stationarity_gate(const EnsembleStats& stats, double nu);

/// |u - v|_1 over time for two solutions driven by the same noise path.
struct CouplingResult {
  std::vector<double> t;
  std::vector<double> distance;
};

/// Records the L1 distance at every snapshot_stride of config (every step
/// when the stride is 0).
CouplingResult coupling_experiment(const SimConfig& config, const Field& u0, const Field& v0, SeedStream stream);

double l1_distance(std::span<const double> a, std::span<const double> b);

/// Random zero-mean field with modes 1..k_max of independent Gaussian
/// amplitudes with standard deviation `amplitude` / k.
Field random_band_limited(std::size_t n_points, long k_max, double amplitude, SeedStream& stream);

/// ({|u(t_end)|^2} - {|u(t_start)|^2}) / T0 + 2 nu {||u||_1^2} - I0.
double energy_balance_residual(const EnsembleStats& stats, double nu, double i0);
/// Standard error of the residual, ignoring correlations between its terms.
double energy_balance_stderr(const EnsembleStats& stats, double nu);

/// Observable names used in EnsembleStats.
namespace obs {
inline constexpr const char* kEnergy = "energy";            // |u|_2^2
inline constexpr const char* kEnergyFirst = "energy_first";  // first half-window
inline constexpr const char* kEnergySecond = "energy_second";
inline constexpr const char* kEnergyStart = "energy_start";  // |u(t_start)|_2^2
inline constexpr const char* kEnergyEnd = "energy_end";
inline constexpr const char* kH1 = "h1_sq";  // ||u||_1^2
inline constexpr const char* kH2 = "h2_sq";
inline constexpr const char* kHs = "hs_sq";  // ||u||_s^2, param s
inline constexpr const char* kLinf = "linf";
inline constexpr const char* kW11 = "w11";
inline constexpr const char* kMaxSlope = "max_slope";
inline constexpr const char* kNorm = "norm_pow";  // |u|_{m,p}^alpha, params m, p, alpha
inline constexpr const char* kX = "x_stat";
inline constexpr const char* kStructure = "sf";  // params ell, p, alpha
inline constexpr const char* kSpectrum = "spectrum";  // params k, M
inline constexpr const char* kEvent = "event_fraction";  // param K
inline constexpr const char* kDrift = "energy_drift";  // second minus first half
inline constexpr const char* kWindowT0 = "window_t0";
}  // namespace obs

}  // namespace burgers
