#include "burgers/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "burgers/errors.hpp"
#include "burgers/snapshot_io.hpp"

namespace burgers {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(std::string(what) + ": cannot parse number '" + s + "'");
  }
  if (used != s.size()) throw Error(std::string(what) + ": trailing characters in '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool close_in_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

// ---------------------------------------------------------------------------
// Window and accumulators

BracketWindow BracketWindow::defaults(double i0) {
  if (!(i0 > 0.0)) throw ConfigError("window defaults need I0 > 0; set window.T0 explicitly for unforced runs");
  BracketWindow w;
  w.t0 = 20.0 / i0;
  w.burn_in = 2.0 * w.t0 + 2.0;
  w.t_start = w.burn_in;
  return w;
}

void BracketWindow::validate() const {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("window.T0 must be positive");
  if (!(burn_in >= 0.0)) throw ConfigError("window.burn_in must be >= 0");
  if (!(t_start >= burn_in)) {
    throw ConfigError("window.t_start = " + fmt(t_start) + " must be >= window.burn_in = " + fmt(burn_in));
  }
}

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Accumulator::merge(const Accumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ = (na * mean_ + nb * other.mean_) / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double Accumulator::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double Accumulator::stderr_of_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Accumulator Accumulator::from_moments(std::size_t n, double mean, double variance) {
  Accumulator a;
  a.n_ = n;
  a.mean_ = mean;
  a.m2_ = n > 1 ? variance * static_cast<double>(n - 1) : 0.0;
  return a;
}

// ---------------------------------------------------------------------------
// Keys and stats

std::optional<double> StatKey::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::string StatKey::params_string() const {
  std::string out;
  for (const auto& [name, value] : params) {
    if (!out.empty()) out += ';';
    out += name + '=' + fmt(value);
  }
  return out;
}

std::map<std::string, double> StatKey::parse_params(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("bad parameter '" + item + "'");
    out[item.substr(0, eq)] = parse_double(item.substr(eq + 1), "parameter");
  }
  return out;
}

void EnsembleStats::merge(const EnsembleStats& other) {
  for (const auto& [key, acc] : other.entries_) entries_[key].merge(acc);
}

const Accumulator* EnsembleStats::find(const StatKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const Accumulator& EnsembleStats::at(const StatKey& key) const {
  const auto* a = find(key);
  if (!a) {
    throw MissingObservable("no statistic for " + key.observable + " at nu = " + fmt(key.nu) +
                            (key.params.empty() ? "" : " (" + key.params_string() + ")"));
  }
  return *a;
}

std::vector<double> EnsembleStats::viscosities(const std::string& observable) const {
  std::vector<double> out;
  for (const auto& [key, acc] : entries_) {
    if (key.observable == observable && (out.empty() || out.back() != key.nu)) out.push_back(key.nu);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::pair<StatKey, Accumulator>> EnsembleStats::select(const std::string& observable, double nu) const {
  std::vector<std::pair<StatKey, Accumulator>> out;
  for (const auto& [key, acc] : entries_) {
    if (key.observable == observable && key.nu == nu) out.emplace_back(key, acc);
  }
  return out;
}

void EnsembleStats::write_csv(std::ostream& out) const {
  out << "observable,nu,params,count,mean,variance,stderr\n";
  for (const auto& [key, acc] : entries_) {
    out << key.observable << ',' << fmt(key.nu) << ',' << key.params_string() << ',' << acc.count() << ','
        << fmt(acc.mean()) << ',' << fmt(acc.variance()) << ',' << fmt(acc.stderr_of_mean()) << '\n';
  }
}

void EnsembleStats::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_csv(out);
}

EnsembleStats EnsembleStats::read_csv(std::istream& in) {
  EnsembleStats stats;
  std::string line;
  if (!std::getline(in, line) || line.rfind("observable,nu,params", 0) != 0) {
    throw Error("stats CSV: missing header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() < 6) throw Error("stats CSV line " + std::to_string(line_no) + ": expected 7 columns");
    StatKey key{cols[0], parse_double(cols[1], "nu"), StatKey::parse_params(cols[2])};
    const auto count = static_cast<std::size_t>(parse_double(cols[3], "count"));
    stats.set(key, Accumulator::from_moments(count, parse_double(cols[4], "mean"), parse_double(cols[5], "variance")));
  }
  return stats;
}

EnsembleStats EnsembleStats::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stats file " + path.string());
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Bracket

double window_average(const Series& s, double t_start, double t0) {
  if (s.t.size() != s.value.size()) throw Error("window_average: series length mismatch");
  const double t_end = t_start + t0;
  if (s.t.empty() || s.t.front() > t_start + 1e-9 * std::max(1.0, t_start) ||
      s.t.back() < t_end - 1e-9 * std::max(1.0, t_end)) {
    throw WindowNotCovered("series does not cover the window [" + fmt(t_start) + ", " + fmt(t_end) + "]");
  }
  if (s.t.size() == 1) return s.value.front();
  auto at = [&](double t) {
    auto it = std::lower_bound(s.t.begin(), s.t.end(), t);
    if (it == s.t.end()) return s.value.back();
    const auto i = static_cast<std::size_t>(it - s.t.begin());
    if (i == 0 || *it == t) return s.value[i];
    const double w = (t - s.t[i - 1]) / (s.t[i] - s.t[i - 1]);
    return (1.0 - w) * s.value[i - 1] + w * s.value[i];
  };
  double integral = 0.0;
  double prev_t = t_start;
  double prev_v = at(t_start);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.t[i] <= t_start) continue;
    if (s.t[i] >= t_end) break;
    integral += 0.5 * (prev_v + s.value[i]) * (s.t[i] - prev_t);
    prev_t = s.t[i];
    prev_v = s.value[i];
  }
  integral += 0.5 * (prev_v + at(t_end)) * (t_end - prev_t);
  return integral / t0;
}

Accumulator bracket(std::span<const Series> realizations, const BracketWindow& window) {
  window.validate();
  Accumulator acc;
  for (const auto& s : realizations) acc.add(window_average(s, window.t_start, window.t0));
  return acc;
}

// ---------------------------------------------------------------------------
// Observable plan

void ObservablePlan::validate(std::size_t n_points) const {
  if (!(observe_stride > 0.0)) throw ConfigError("observables.observe_stride must be positive");
  if (!(sample_stride > 0.0)) throw ConfigError("observables.sample_stride must be positive");
  for (double l : ells) {
    if (!(l > 0.0 && l <= 1.0)) throw ConfigError("observables.ells entries must lie in (0,1]");
    if (shift == ShiftMode::Grid) {
      const double j = l * static_cast<double>(n_points);
      if (std::abs(j - std::round(j)) > 1e-9 * std::max(1.0, j)) {
        throw ConfigError("observables.ells entry " + fmt(l) + " is off the grid; use observables.shift = spectral");
      }
    }
  }
  for (double p : ps) {
    if (!(p >= 0.0)) throw ConfigError("observables.p entries must be >= 0");
  }
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ConfigError("observables.alpha entries must be >= 0");
  }
  const long cutoff = dealias_cutoff(n_points);
  for (double m : spectrum_M) {
    SpectrumSpec{m}.validate();
    for (long k : ks) {
      if (k < 1) throw ConfigError("observables.k entries must be >= 1");
      if (static_cast<double>(k) * m > static_cast<double>(cutoff) + 1e-9) {
        throw ConfigError("spectrum layer M k = " + fmt(m * static_cast<double>(k)) +
                          " exceeds the dealiasing cutoff " + std::to_string(cutoff));
      }
    }
  }
  for (double s : sobolev_s) {
    if (!(s >= 0.0)) throw ConfigError("observables.s entries must be >= 0");
  }
  for (const auto& t : norms) {
    if (t.m < 0 || t.m > 2) throw ConfigError("observables.norms: derivative order must be 0, 1 or 2");
    if (!(t.p >= 1.0)) throw ConfigError("observables.norms: p must be >= 1");
    if (!(t.alpha > 0.0)) throw ConfigError("observables.norms: alpha must be positive");
  }
  for (double k : event_K) {
    if (!(k > 0.0)) throw ConfigError("observables.K entries must be positive");
  }
}

std::vector<double> default_ells(std::size_t n_points, double nu, std::span<const double> range_K) {
  std::vector<double> out;
  const double n = static_cast<double>(n_points);
  for (std::size_t j = 1; j <= n_points / 2;) {
    out.push_back(static_cast<double>(j) / n);
    j = std::max(j + 1, static_cast<std::size_t>(std::lround(static_cast<double>(j) * std::numbers::sqrt2)));
  }
  for (double K : range_K) {
    const RangeSpec spec{K};
    const double top = spec.c1() * nu;
    for (int i = 1; i <= 6; ++i) out.push_back(top * std::exp2(-i));
    if (nu <= spec.nu0()) {
      // eight points across the inertial range with one octave trimmed at each end
      double lo = 2.0 * top;
      double hi = spec.c2() / 2.0;
      if (!(hi > lo)) {
        lo = top;
        hi = spec.c2();
      }
      for (int i = 0; i < 8; ++i) out.push_back(lo * std::pow(hi / lo, i / 7.0));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
            out.end());
  return out;
}

std::vector<long> default_ks(std::size_t n_points, double max_M) {
  std::vector<long> out;
  const double cutoff = static_cast<double>(dealias_cutoff(n_points));
  for (long k = 1; static_cast<double>(k) * max_M <= cutoff + 1e-9;) {
    out.push_back(k);
    k = std::max(k + 1, std::lround(static_cast<double>(k) * std::numbers::sqrt2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One realization

std::string fingerprint(const EnsembleConfig& c) {
  std::ostringstream d;
  const auto& s = c.sim;
  d << "nu=" << fmt(s.nu) << " n=" << s.n_points << " flux=" << static_cast<int>(s.flux.kind) << ':' << fmt(s.flux.a)
    << " dt=" << static_cast<int>(s.dt_policy.mode) << ':' << fmt(s.dt_policy.dt) << ':' << fmt(s.dt_policy.cfl_safety)
    << " guard=" << (s.blowup_guard ? fmt(*s.blowup_guard) : "auto") << " nl=" << s.nonlinearity
    << " conv=" << static_cast<int>(s.forcing.convention) << " b=";
  for (double b : s.forcing.b) d << fmt(b) << ',';
  const auto& w = c.window;
  d << " window=" << fmt(w.t0) << ':' << fmt(w.burn_in) << ':' << fmt(w.t_start);
  const auto& p = c.plan;
  d << " obs=" << fmt(p.observe_stride) << ':' << fmt(p.sample_stride) << " shift=" << static_cast<int>(p.shift);
  auto list = [&](const char* name, const auto& v) {
    d << ' ' << name << '=';
    for (const auto& x : v) d << fmt(static_cast<double>(x)) << ',';
  };
  list("ells", p.ells);
  list("ps", p.ps);
  list("alphas", p.alphas);
  list("ks", p.ks);
  list("M", p.spectrum_M);
  list("s", p.sobolev_s);
  list("K", p.event_K);
  d << " norms=";
  for (const auto& t : p.norms) d << t.m << ':' << fmt(t.p) << ':' << fmt(t.alpha) << ',';
  d << " x=" << p.x_statistic << " seed=" << c.master_seed;
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : d.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Event {
  double t;
  bool record = false;     // full-history observable record
  bool window = false;     // cheap window observables
  bool sample = false;     // structure functions, spectra, events
  bool snapshot = false;
};

std::vector<Event> schedule(double horizon, double record_stride, double t_start, double t_end, double window_stride,
                            double sample_stride, double snapshot_stride) {
  std::vector<Event> ev;
  auto grid = [&](double anchor, double stride, double stop, auto flag) {
    for (std::size_t i = 0;; ++i) {
      double t = anchor + stride * static_cast<double>(i);
      const bool last = t > stop || close_in_time(t, stop);
      if (last) t = stop;
      Event e{t};
      flag(e);
      ev.push_back(e);
      if (last) break;
    }
  };
  grid(0.0, record_stride, horizon, [](Event& e) { e.record = true; });
  grid(t_start, window_stride, t_end, [](Event& e) { e.window = true; });
  grid(t_start, sample_stride, t_end, [](Event& e) { e.sample = true; });
  if (snapshot_stride > 0.0) grid(0.0, snapshot_stride, horizon, [](Event& e) { e.snapshot = true; });
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  std::vector<Event> merged;
  for (const auto& e : ev) {
    if (!merged.empty() && close_in_time(e.t, merged.back().t)) {
      auto& m = merged.back();
      m.record |= e.record;
      m.window |= e.window;
      m.sample |= e.sample;
      m.snapshot |= e.snapshot;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

}  // namespace

void write_records(const std::filesystem::path& path, std::span<const ObservableRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "t,energy,h1_sq,h2_sq,linf,w11,max_slope\n";
  for (const auto& r : records) {
    out << fmt(r.t) << ',' << fmt(r.energy) << ',' << fmt(r.h1_sq) << ',' << fmt(r.h2_sq) << ',' << fmt(r.linf) << ','
        << fmt(r.w11) << ',' << fmt(r.max_slope) << '\n';
  }
}

namespace {

void write_summary(const std::filesystem::path& path, const std::string& print, const RealizationSummary& summary) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << "# fingerprint=" << print << '\n' << "observable,params,value\n";
    for (const auto& [key, value] : summary) out << key.observable << ',' << key.params_string() << ',' << fmt(value) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::optional<RealizationSummary> read_summary(const std::filesystem::path& path, const std::string& print, double nu) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != "# fingerprint=" + print) return std::nullopt;
  std::getline(in, line);
  RealizationSummary summary;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) return std::nullopt;
    summary[StatKey{cols[0], nu, StatKey::parse_params(cols[1])}] = parse_double(cols[2], "summary");
  }
  return summary;
}

}  // namespace

RealizationResult run_realization(const EnsembleConfig& config, std::size_t index, const OutputOptions& out) {
  const auto& sim_cfg = config.sim;
  const auto& plan = config.plan;
  const auto& win = config.window;
  win.validate();
  plan.validate(sim_cfg.n_points);
  const double nu = sim_cfg.nu;

  std::optional<std::filesystem::path> dir;
  if (out.nu_dir) {
    dir = *out.nu_dir / ("real=" + std::to_string(index));
    std::filesystem::create_directories(*dir);
  }
  const std::string print = fingerprint(config);
  RealizationResult result;
  result.index = index;
  if (dir && out.reuse_completed) {
    if (auto cached = read_summary(*dir / "summary.csv", print, nu)) {
      result.summary = std::move(*cached);
      return result;
    }
  }

  const double horizon = win.t_end() + (plan.x_statistic ? 1.0 : 0.0);
  const auto events = schedule(horizon, plan.observe_stride, win.t_start, win.t_end(), plan.observe_stride,
                               plan.sample_stride, out.write_snapshots && dir ? sim_cfg.snapshot_stride : 0.0);

  std::map<StatKey, Series> series;
  auto push = [&](StatKey key, double t, double v) {
    key.nu = nu;
    auto& s = series[key];
    s.t.push_back(t);
    s.value.push_back(v);
  };
  double energy_start = 0.0;
  double energy_end = 0.0;

  if (dir && out.write_snapshots) std::filesystem::create_directories(*dir / "snapshots");
  std::size_t snap_index = 0;

  Simulation sim(sim_cfg, SeedStream(config.master_seed, index));
  try {
    for (const auto& ev : events) {
      sim.advance_to(ev.t);
      const double t = ev.t;
      sim.samples();  // blow-up check
      const Field f = sim.field();
      std::optional<ObservableRecord> rec;
      if (ev.record || ev.window) rec = record_observables(f, t);
      if (ev.record) result.records.push_back(*rec);
      if (ev.snapshot) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.brg", snap_index++);
        write_snapshot(*dir / "snapshots" / name, make_snapshot(f, t, nu));
      }
      if (ev.window) {
        push({obs::kEnergy, 0.0, {}}, t, rec->energy);
        push({obs::kH1, 0.0, {}}, t, rec->h1_sq);
        push({obs::kH2, 0.0, {}}, t, rec->h2_sq);
        push({obs::kLinf, 0.0, {}}, t, rec->linf);
        push({obs::kW11, 0.0, {}}, t, rec->w11);
        push({obs::kMaxSlope, 0.0, {}}, t, rec->max_slope);
        for (double s : plan.sobolev_s) {
          const double h = norm(f, Hs{s});
          push({obs::kHs, 0.0, {{"s", s}}}, t, h * h);
        }
        for (const auto& term : plan.norms) {
          const double v = norm(f, Wmp{term.m, term.p});
          push({obs::kNorm, 0.0, {{"m", static_cast<double>(term.m)}, {"p", term.p}, {"alpha", term.alpha}}}, t, std::pow(v, term.alpha));
        }
        if (close_in_time(t, win.t_start)) energy_start = rec->energy;
        if (close_in_time(t, win.t_end())) energy_end = rec->energy;
      }
      if (ev.sample) {
        if (!plan.ells.empty()) {
          const auto table = structure_functions(f, plan.ells, plan.ps, plan.shift);
          for (std::size_t i = 0; i < plan.ells.size(); ++i) {
            for (std::size_t j = 0; j < plan.ps.size(); ++j) {
              for (double a : plan.alphas) {
                push({obs::kStructure, 0.0, {{"ell", plan.ells[i]}, {"p", plan.ps[j]}, {"alpha", a}}}, t,
                     std::pow(table[i][j], a));
              }
            }
          }
        }
        for (double m : plan.spectrum_M) {
          for (long k : plan.ks) push({obs::kSpectrum, 0.0, {{"k", static_cast<double>(k)}, {"M", m}}}, t,
                                      layer_energy(f, k, SpectrumSpec{m}));
        }
        if (!plan.event_K.empty()) {
          const auto es = event_sample(f);
          for (double K : plan.event_K) push({obs::kEvent, 0.0, {{"K", K}}}, t, in_event(es, nu, K) ? 1.0 : 0.0);
        }
      }
    }
  } catch (const BlowUp& e) {
    throw BlowUp(std::string(e.what()) + " in realization " + std::to_string(index), e.time(),
                 static_cast<long>(index));
  }

  if (plan.x_statistic) {
    Series xs;
    for (const auto& [key, s] : series) {
      if (key.observable != obs::kEnergy) continue;
      for (double t : s.t) {
        xs.t.push_back(t);
        xs.value.push_back(x_statistic(result.records, t));
      }
    }
    series[StatKey{obs::kX, nu, {}}] = std::move(xs);
  }

  auto& sum = result.summary;
  for (const auto& [key, s] : series) sum[key] = window_average(s, win.t_start, win.t0);
  const auto& energy = series.at(StatKey{obs::kEnergy, nu, {}});
  const double first = window_average(energy, win.t_start, win.t0 / 2.0);
  const double second = window_average(energy, win.t_start + win.t0 / 2.0, win.t0 / 2.0);
  sum[StatKey{obs::kEnergyFirst, nu, {}}] = first;
  sum[StatKey{obs::kEnergySecond, nu, {}}] = second;
  sum[StatKey{obs::kDrift, nu, {}}] = second - first;
  sum[StatKey{obs::kEnergyStart, nu, {}}] = energy_start;
  sum[StatKey{obs::kEnergyEnd, nu, {}}] = energy_end;
  sum[StatKey{obs::kWindowT0, nu, {}}] = win.t0;

  if (dir) {
    write_records(*dir / "observables.csv", result.records);
    write_summary(*dir / "summary.csv", print, sum);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Ensemble

std::string GateResult::describe() const {
  std::ostringstream s;
  if (!evaluated) {
    s << "stationarity gate not evaluated (needs at least two realizations)";
    return s.str();
  }
  s << "stationarity gate " << (passed ? "passed" : "FAILED") << ": half-window means of |u|_2^2 " << first_half
    << " and " << second_half << ", |difference| " << std::abs(second_half - first_half)
    << (passed ? " <= " : " > ") << "2 x " << stderr_of_difference;
  return s.str();
}

GateResult stationarity_gate(const EnsembleStats& stats, double nu) {
  GateResult g;
  const auto& drift = stats.at(StatKey{obs::kDrift, nu, {}});
  g.first_half = stats.at(StatKey{obs::kEnergyFirst, nu, {}}).mean();
  g.second_half = stats.at(StatKey{obs::kEnergySecond, nu, {}}).mean();
  g.stderr_of_difference = drift.stderr_of_mean();
  g.evaluated = drift.count() >= 2;
  g.passed = !g.evaluated || std::abs(drift.mean()) <= 2.0 * g.stderr_of_difference;
  return g;
}

EnsembleResult run_ensemble(const EnsembleConfig& config, const OutputOptions& out,
                            const std::function<void(std::size_t)>& on_done) {
  if (config.realizations < 1) throw ConfigError("run.realizations must be >= 1");
  config.sim.validate();
  config.window.validate();
  config.plan.validate(config.sim.n_points);

  const std::size_t r_count = config.realizations;
  std::vector<RealizationSummary> summaries(r_count);
  std::vector<std::exception_ptr> errors(r_count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex report;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= r_count || failed.load()) return;
      try {
        summaries[i] = run_realization(config, i, out).summary;
        if (on_done) {
          std::lock_guard lock(report);
          on_done(i);
        }
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, r_count);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleResult result;
  for (const auto& summary : summaries) {
    for (const auto& [key, value] : summary) result.stats.add(key, value);
  }
  result.gate = stationarity_gate(result.stats, config.sim.nu);
  return result;
}

// ---------------------------------------------------------------------------
// Coupling

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("l1_distance: size mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a[j] - b[j]);
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

CouplingResult coupling_experiment(const SimConfig& config, const Field& u0, const Field& v0, SeedStream stream) {
  Simulation sim(config, stream, {u0, v0});
  CouplingResult r;
  auto record = [&] {
    const auto a = sim.samples(0);
    const std::vector<double> first(a.begin(), a.end());
    r.t.push_back(sim.time());
    r.distance.push_back(l1_distance(first, sim.samples(1)));
  };
  record();
  const double stride = config.snapshot_stride;
  std::size_t next = 1;
  while (sim.time() < config.t_end) {
    const double target = stride > 0.0 ? std::min(config.t_end, stride * static_cast<double>(next)) : config.t_end;
    sim.step_once(target);
    if (stride == 0.0 || sim.time() >= target) {
      record();
      if (stride > 0.0) ++next;
    }
  }
  return r;
}

Field random_band_limited(std::size_t n_points, long k_max, double amplitude, SeedStream& stream) {
  std::vector<Complex> c(n_points / 2 + 1);
  if (k_max > static_cast<long>(n_points / 2) - 1) throw Error("random_band_limited: k_max too large for the grid");
  for (long k = 1; k <= k_max; ++k) {
    const double sd = amplitude / static_cast<double>(k) / std::numbers::sqrt2;
    const double re = stream.gaussian();
    const double im = stream.gaussian();
    c[static_cast<std::size_t>(k)] = Complex{sd * re, sd * im};
  }
  return Field::from_coeffs(n_points, std::move(c));
}

double energy_balance_residual(const EnsembleStats& stats, double nu, double i0) {
  const double t0 = stats.at(StatKey{obs::kWindowT0, nu, {}}).mean();
  const double e0 = stats.at(StatKey{obs::kEnergyStart, nu, {}}).mean();
  const double e1 = stats.at(StatKey{obs::kEnergyEnd, nu, {}}).mean();
  const double h1 = stats.at(StatKey{obs::kH1, nu, {}}).mean();
  return (e1 - e0) / t0 + 2.0 * nu * h1 - i0;
}

double energy_balance_stderr(const EnsembleStats& stats, double nu) {
  const double t0 = stats.at(StatKey{obs::kWindowT0, nu, {}}).mean();
  const double s0 = stats.at(StatKey{obs::kEnergyStart, nu, {}}).stderr_of_mean() / t0;
  const double s1 = stats.at(StatKey{obs::kEnergyEnd, nu, {}}).stderr_of_mean() / t0;
  const double sh = 2.0 * nu * stats.at(StatKey{obs::kH1, nu, {}}).stderr_of_mean();
  return std::sqrt(s0 * s0 + s1 * s1 + sh * sh);
}

}  // namespace burgers
