#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "burgers/ensemble.hpp"
#include "burgers/scaling.hpp"
#include "burgers/solver.hpp"

namespace burgers {

/// Flat `key = value` document. '#' starts a comment; values may be quoted;
/// lists are written `[a, b, c]`.
class ConfigDoc {
 public:
  static ConfigDoc parse(std::istream& in, const std::string& source = "<input>");
  static ConfigDoc load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// "key=value" override as given on the command line.
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Every recognised key with its default value.
const std::map<std::string, std::string>& config_defaults();

/// Validated, typed view of a config document merged over the defaults.
struct RunConfig {
  std::map<std::string, std::string> effective;  // every key, after overrides

  std::string name;
  std::filesystem::path output_dir;
  bool write_snapshots = false;

  SimConfig sim;            // solver.nu and friends; n_points 0 means auto
  std::vector<double> sweep;  // sweep.nu, or {solver.nu} when empty
  BracketWindow window;
  bool window_auto_t0 = true;
  bool window_auto_burn_in = true;
  bool window_auto_t_start = true;
  ObservablePlan plan;
  bool auto_ells = true;
  bool auto_ks = true;
  std::vector<double> range_K;  // K values whose ranges get l points
  double K = 5.0;

  std::uint64_t seed = 1;
  std::size_t realizations = 1;
  std::size_t jobs = 1;

  std::vector<std::string> targets;  // empty: the whole table
  double fit_nu_lo = 1e-3;
  double fit_nu_hi = 1e-2;
  std::map<std::string, double> tolerances;

  /// Throws ConfigError on unknown keys or values that break a module's
  /// invariants.
  static RunConfig from(const ConfigDoc& doc);

  double i0() const;
  std::filesystem::path run_dir() const { return output_dir / name; }
  /// Simulation settings at viscosity nu, with n resolved.
  SimConfig sim_for(double nu) const;
  EnsembleConfig ensemble_for(double nu) const;
  std::vector<ScalingTarget> target_table() const;

  /// The effective document, one `key = value` per line.
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
};

/// Directory name of one viscosity: "nu=<value>".
std::string nu_dir_name(double nu);

}  // namespace burgers
