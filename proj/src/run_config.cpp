#include "burgers/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
  return v;
}

const std::string kTolerancePrefix = "analysis.tolerance.";

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": '" + text + "' is not a number");
  }
  return v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": '" + text + "' is not a boolean");
}

std::vector<std::string> to_items(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("unterminated list '" + text + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : to_items(text)) out.push_back(to_double(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ConfigDoc ConfigDoc::parse(std::istream& in, const std::string& source) {
  ConfigDoc doc;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    // '#' inside quotes is kept
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    doc.values_[key] = unquote(trim(t.substr(eq + 1)));
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse(in, path.string());
}

void ConfigDoc::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), unquote(trim(assignment.substr(eq + 1))));
}

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = [] {
    std::map<std::string, std::string> d = {
        {"run.name", "run"},
        {"run.seed", "1"},
        {"run.realizations", "8"},
        {"run.jobs", "1"},
        {"solver.nu", "0.01"},
        {"solver.n", "auto"},
        {"solver.flux", "classical"},
        {"solver.flux_a", "0"},
        {"solver.dt", "auto"},
        {"solver.cfl_safety", "0.4"},
        {"solver.t_end", "10"},
        {"solver.snapshot_stride", "1"},
        {"solver.observe_stride", "0.01"},
        {"solver.blowup_guard", "auto"},
        {"forcing.profile", "exp"},
        {"forcing.kf", "4"},
        {"forcing.cutoff", "32"},
        {"forcing.i0_target", "1"},
        {"forcing.b", "[]"},
        {"forcing.convention", "pair_shared"},
        {"window.T0", "auto"},
        {"window.burn_in", "auto"},
        {"window.t_start", "auto"},
        {"sweep.nu", "[]"},
        {"observables.observe_stride", "0.01"},
        {"observables.sample_stride", "0.1"},
        {"observables.ells", "auto"},
        {"observables.ps", "[2, 4]"},
        {"observables.alphas", "[1]"},
        {"observables.shift", "spectral"},
        {"observables.ks", "auto"},
        {"observables.spectrum_M", "[4]"},
        {"observables.sobolev_s", "[0.25, 0.5, 0.75]"},
        {"observables.event_K", "[10]"},
        {"observables.x_statistic", "true"},
        {"ranges.K", "5"},
        {"ranges.ell_K", "[5]"},
        {"analysis.targets", "all"},
        {"analysis.nu_lo", "0.001"},
        {"analysis.nu_hi", "0.01"},
        {"output.dir", "runs"},
        {"output.snapshots", "false"},
    };
    for (const auto& [id, tol] : default_tolerances()) d[kTolerancePrefix + id] = fmt(tol);
    return d;
  }();
  return defaults;
}

RunConfig RunConfig::from(const ConfigDoc& doc) {
  RunConfig c;
  c.effective = config_defaults();
  for (const auto& [key, value] : doc.values()) {
    if (!c.effective.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    c.effective[key] = value;
  }
  const auto& e = c.effective;
  auto get = [&](const std::string& key) -> const std::string& { return e.at(key); };
  auto num = [&](const std::string& key) { return to_double(key, get(key)); };
  auto is_auto = [&](const std::string& key) { return get(key) == "auto"; };

  c.name = get("run.name");
  if (c.name.empty() || c.name.find('/') != std::string::npos) throw ConfigError("run.name must be a plain directory name");
  c.output_dir = get("output.dir");
  c.write_snapshots = to_bool("output.snapshots", get("output.snapshots"));
  c.seed = to_count("run.seed", get("run.seed"));
  c.realizations = to_count("run.realizations", get("run.realizations"));
  if (c.realizations < 1) throw ConfigError("run.realizations must be >= 1");
  c.jobs = std::max<std::size_t>(1, to_count("run.jobs", get("run.jobs")));

  auto& s = c.sim;
  s.nu = num("solver.nu");
  s.n_points = is_auto("solver.n") ? 0 : to_count("solver.n", get("solver.n"));
  const std::string flux = get("solver.flux");
  if (flux == "classical") {
    s.flux = FluxSpec::classical();
  } else if (flux == "softened_quartic") {
    s.flux = FluxSpec::softened_quartic(num("solver.flux_a"));
  } else {
    throw ConfigError("solver.flux must be classical or softened_quartic, got '" + flux + "'");
  }
  const double safety = num("solver.cfl_safety");
  s.dt_policy = is_auto("solver.dt") ? DtPolicy::cfl(safety) : DtPolicy::fixed(num("solver.dt"));
  s.dt_policy.cfl_safety = safety;
  s.t_end = num("solver.t_end");
  s.snapshot_stride = num("solver.snapshot_stride");
  s.observe_stride = num("solver.observe_stride");
  if (!is_auto("solver.blowup_guard")) s.blowup_guard = num("solver.blowup_guard");

  const std::string conv = get("forcing.convention");
  ChannelConvention convention;
  if (conv == "pair_shared") {
    convention = ChannelConvention::PairShared;
  } else if (conv == "per_channel") {
    convention = ChannelConvention::PerChannel;
  } else {
    throw ConfigError("forcing.convention must be pair_shared or per_channel, got '" + conv + "'");
  }
  const std::string profile = get("forcing.profile");
  if (profile == "exp") {
    const double cutoff = num("forcing.cutoff");
    if (cutoff != std::floor(cutoff)) throw ConfigError("forcing.cutoff must be an integer");
    s.forcing = ForcingSpec::exponential(num("forcing.kf"), static_cast<int>(cutoff), num("forcing.i0_target"), convention);
  } else if (profile == "explicit") {
    s.forcing = ForcingSpec::from_amplitudes(to_doubles("forcing.b", get("forcing.b")), convention);
  } else {
    throw ConfigError("forcing.profile must be exp or explicit, got '" + profile + "'");
  }

  c.sweep = to_doubles("sweep.nu", get("sweep.nu"));
  if (c.sweep.empty()) c.sweep = {s.nu};

  // window entries left on auto follow T0 = 20/I0, burn-in 2 T0 + 2, start at the burn-in
  c.window_auto_t0 = is_auto("window.T0");
  c.window_auto_burn_in = is_auto("window.burn_in");
  c.window_auto_t_start = is_auto("window.t_start");
  auto& w = c.window;
  w.t0 = c.window_auto_t0 ? 20.0 / c.i0() : num("window.T0");
  if (c.window_auto_t0 && !(c.i0() > 0.0)) throw ConfigError("window.T0 = auto needs I0 > 0; set window.T0");
  w.burn_in = c.window_auto_burn_in ? 2.0 * w.t0 + 2.0 : num("window.burn_in");
  w.t_start = c.window_auto_t_start ? w.burn_in : num("window.t_start");
  w.validate();

  auto& p = c.plan;
  p.observe_stride = num("observables.observe_stride");
  p.sample_stride = num("observables.sample_stride");
  c.auto_ells = is_auto("observables.ells");
  if (!c.auto_ells) p.ells = to_doubles("observables.ells", get("observables.ells"));
  p.ps = to_doubles("observables.ps", get("observables.ps"));
  p.alphas = to_doubles("observables.alphas", get("observables.alphas"));
  const std::string shift = get("observables.shift");
  if (shift == "spectral") {
    p.shift = ShiftMode::Spectral;
  } else if (shift == "grid") {
    p.shift = ShiftMode::Grid;
  } else {
    throw ConfigError("observables.shift must be spectral or grid, got '" + shift + "'");
  }
  c.auto_ks = is_auto("observables.ks");
  if (!c.auto_ks) {
    for (double k : to_doubles("observables.ks", get("observables.ks"))) {
      if (!(k >= 1.0) || k != std::floor(k)) throw ConfigError("observables.ks must hold integers >= 1");
      p.ks.push_back(static_cast<long>(k));
    }
  }
  p.spectrum_M = to_doubles("observables.spectrum_M", get("observables.spectrum_M"));
  for (double m : p.spectrum_M) SpectrumSpec{m}.validate();
  p.sobolev_s = to_doubles("observables.sobolev_s", get("observables.sobolev_s"));
  p.event_K = to_doubles("observables.event_K", get("observables.event_K"));
  p.x_statistic = to_bool("observables.x_statistic", get("observables.x_statistic"));

  c.K = num("ranges.K");
  RangeSpec{c.K}.validate();
  c.range_K = to_doubles("ranges.ell_K", get("ranges.ell_K"));
  for (double k : c.range_K) RangeSpec{k}.validate();

  const auto targets = to_items(get("analysis.targets"));
  if (!(targets.size() == 1 && targets.front() == "all")) c.targets = targets;
  c.fit_nu_lo = num("analysis.nu_lo");
  c.fit_nu_hi = num("analysis.nu_hi");
  if (!(c.fit_nu_lo > 0.0 && c.fit_nu_lo < c.fit_nu_hi)) throw ConfigError("analysis.nu_lo must be in (0, analysis.nu_hi)");
  for (const auto& [key, value] : e) {
    if (key.rfind(kTolerancePrefix, 0) == 0) c.tolerances[key.substr(kTolerancePrefix.size())] = to_double(key, value);
  }
  c.target_table();  // rejects unknown target names

  for (double nu : c.sweep) {
    const auto ec = c.ensemble_for(nu);
    ec.sim.validate();
    ec.plan.validate(ec.sim.n_points);
  }
  return c;
}

double RunConfig::i0() const { return trace(sim.forcing, 0); }

SimConfig RunConfig::sim_for(double nu) const {
  SimConfig s = sim;
  s.nu = nu;
  if (s.n_points == 0) {
    if (!(nu > 0.0)) throw ConfigError("solver.nu = " + fmt(nu) + " violates nu in (0,1]");
    s.n_points = resolution_for(nu);
  }
  return s;
}

EnsembleConfig RunConfig::ensemble_for(double nu) const {
  EnsembleConfig ec;
  ec.sim = sim_for(nu);
  ec.window = window;
  ec.plan = plan;
  if (auto_ells) ec.plan.ells = default_ells(ec.sim.n_points, nu, range_K);
  if (auto_ks) {
    const double max_m = plan.spectrum_M.empty() ? 1.0 : *std::max_element(plan.spectrum_M.begin(), plan.spectrum_M.end());
    ec.plan.ks = default_ks(ec.sim.n_points, max_m);
  }
  ec.master_seed = seed;
  ec.realizations = realizations;
  ec.jobs = jobs;
  return ec;
}

std::vector<ScalingTarget> RunConfig::target_table() const {
  auto table = builtin_targets(K, fit_nu_lo, fit_nu_hi);
  if (targets.empty()) return table;
  return select_targets(table, targets);
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& [key, value] : effective) out << key << " = " << value << '\n';
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write(out);
}

std::string nu_dir_name(double nu) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "nu=%.6g", nu);
  return buf;
}

}  // namespace burgers
