#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "burgers/ensemble.hpp"
#include "burgers/errors.hpp"
#include "burgers/norms.hpp"
#include "burgers/run_config.hpp"
#include "burgers/scaling.hpp"
#include "burgers/snapshot_io.hpp"
#include "burgers/solver.hpp"

namespace fs = std::filesystem;
using namespace burgers;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kBlowUp = 3, kGate = 4, kTargets = 5 };

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<double> nu;
  std::optional<std::size_t> n;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> realizations;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "run config file (flat key = value)");
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set solver.nu=0.003 (repeatable)");
  cmd->add_option("--seed", c.seed, "master seed (run.seed)");
  cmd->add_option("--jobs", c.jobs, "worker threads (run.jobs)");
  cmd->add_option("--out", c.out, "output directory (output.dir)");
}

void add_solver(CLI::App* cmd, Common& c) {
  cmd->add_option("--nu", c.nu, "viscosity (solver.nu; replaces sweep.nu)");
  cmd->add_option("--n", c.n, "grid size, a power of two (solver.n)");
  cmd->add_option("--t-end", c.t_end, "horizon (solver.t_end)");
  cmd->add_option("--dt", c.dt, "fixed time step instead of the CFL policy (solver.dt)");
  cmd->add_option("-R,--realizations", c.realizations, "realizations per viscosity (run.realizations)");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig load(const Common& c) {
  ConfigDoc doc;
  if (!c.config_path.empty()) doc = ConfigDoc::load(c.config_path);
  for (const auto& s : c.sets) doc.set_assignment(s);
  if (c.nu) {
    doc.set("solver.nu", num(*c.nu));
    doc.set("sweep.nu", "[" + num(*c.nu) + "]");
  }
  if (c.n) doc.set("solver.n", std::to_string(*c.n));
  if (c.t_end) doc.set("solver.t_end", num(*c.t_end));
  if (c.seed) doc.set("run.seed", std::to_string(*c.seed));
  if (c.dt) doc.set("solver.dt", num(*c.dt));
  if (c.jobs) doc.set("run.jobs", std::to_string(*c.jobs));
  if (c.realizations) doc.set("run.realizations", std::to_string(*c.realizations));
  if (c.out) doc.set("output.dir", *c.out);
  return RunConfig::from(doc);
}

int cmd_simulate(const Common& c) {
  const RunConfig rc = load(c);
  const SimConfig sim = rc.sim_for(rc.sim.nu);
  sim.validate();
  const fs::path dir = rc.run_dir() / nu_dir_name(sim.nu) / "real=0";
  fs::create_directories(dir / "snapshots");
  rc.write(rc.run_dir() / "config.txt");

  const Trajectory traj = run(sim, SeedStream(rc.seed, 0));
  write_records(dir / "observables.csv", traj.records);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06zu.brg", i);
    write_snapshot(dir / "snapshots" / name, make_snapshot(traj.snapshots[i].field, traj.snapshots[i].t, sim.nu));
  }

  const auto& last = traj.records.back();
  std::printf("nu = %g, N = %zu, t = %g\n", sim.nu, sim.n_points, last.t);
  std::printf("  |u|_2^2    = %.6g\n  ||u||_1^2  = %.6g\n  ||u||_2^2  = %.6g\n", last.energy, last.h1_sq, last.h2_sq);
  std::printf("  |u|_inf    = %.6g\n  |u|_{1,1}  = %.6g\n  max u_x    = %.6g\n", last.linf, last.w11, last.max_slope);
  if (last.t >= 1.0) {
    // the windows [t, t+1], 0 <= t <= t_end - 1, cover every record
    double x = -kInfinity;
    for (const auto& r : traj.records) x = std::max(x, r.max_slope);
    std::printf("  max X_t    = %.6g\n", x);
  } else {
    std::printf("  max X_t    = n/a (horizon shorter than 1)\n");
  }
  std::printf("wrote %s\n", dir.string().c_str());
  return kOk;
}

int cmd_ensemble_impl(const RunConfig& rc, bool resume, EnsembleStats& stats) {
  rc.write(rc.run_dir() / "config.txt");
  bool gates_ok = true;
  for (double nu : rc.sweep) {
    const EnsembleConfig ec = rc.ensemble_for(nu);
    OutputOptions out;
    out.nu_dir = rc.run_dir() / nu_dir_name(nu);
    out.write_snapshots = rc.write_snapshots;
    out.reuse_completed = resume;
    std::fprintf(stderr, "nu = %g: N = %zu, R = %zu, window [%g, %g]\n", nu, ec.sim.n_points, ec.realizations,
                 ec.window.t_start, ec.window.t_end());
    const auto result = run_ensemble(ec, out, [&](std::size_t i) {
      std::fprintf(stderr, "  nu = %g: realization %zu done\n", nu, i);
    });
    stats.merge(result.stats);
    std::printf("nu = %g: %s\n", nu, result.gate.describe().c_str());
    gates_ok = gates_ok && result.gate.passed;
  }
  stats.write_csv(rc.run_dir() / "stats.csv");
  std::printf("wrote %s\n", (rc.run_dir() / "stats.csv").string().c_str());
  return gates_ok ? kOk : kGate;
}

int cmd_ensemble(const Common& c, bool resume) {
  const RunConfig rc = load(c);
  EnsembleStats stats;
  return cmd_ensemble_impl(rc, resume, stats);
}

EnsembleStats load_stats(const RunConfig& rc, const std::string& stats_path) {
  const fs::path p = stats_path.empty() ? rc.run_dir() / "stats.csv" : fs::path(stats_path);
  if (!fs::exists(p)) throw ConfigError("stats file " + p.string() + " not found; run `ensemble` first or pass --run");
  return EnsembleStats::read_csv(p);
}

void write_tables(const RunConfig& rc, const EnsembleStats& stats) {
  const fs::path dir = rc.run_dir();
  fs::create_directories(dir);
  std::ofstream sf(dir / "sf.csv");
  std::ofstream sp(dir / "spectrum.csv");
  std::ofstream fl(dir / "flatness.csv");
  sf << "nu,ell,p,alpha,mean,stderr\n";
  sp << "nu,k,M,mean,stderr\n";
  fl << "nu,ell,flatness,stderr\n";
  std::map<std::pair<double, double>, std::pair<const Accumulator*, const Accumulator*>> pairs;
  for (const auto& [key, acc] : stats.entries()) {
    if (key.observable == obs::kStructure) {
      const double ell = key.param("ell").value_or(0), p = key.param("p").value_or(0), a = key.param("alpha").value_or(0);
      sf << num(key.nu) << ',' << num(ell) << ',' << num(p) << ',' << num(a) << ',' << num(acc.mean()) << ','
         << num(acc.stderr_of_mean()) << '\n';
      if (a == 1.0 && p == 2.0) pairs[{key.nu, ell}].first = &acc;
      if (a == 1.0 && p == 4.0) pairs[{key.nu, ell}].second = &acc;
    } else if (key.observable == obs::kSpectrum) {
      sp << num(key.nu) << ',' << num(key.param("k").value_or(0)) << ',' << num(key.param("M").value_or(0)) << ','
         << num(acc.mean()) << ',' << num(acc.stderr_of_mean()) << '\n';
    }
  }
  for (const auto& [at, pr] : pairs) {
    if (!pr.first || !pr.second || !(pr.first->mean() >= 1e-300)) continue;
    const double s2 = pr.first->mean(), s4 = pr.second->mean();
    const double f = flatness(s4, s2);
    const double r4 = s4 > 0 ? pr.second->stderr_of_mean() / s4 : 0.0;
    const double r2 = pr.first->stderr_of_mean() / s2;
    fl << num(at.first) << ',' << num(at.second) << ',' << num(f) << ',' << num(f * std::sqrt(r4 * r4 + 4 * r2 * r2))
       << '\n';
  }
}

int cmd_analyze(const Common& c, const std::string& stats_path) {
  const RunConfig rc = load(c);
  const EnsembleStats stats = load_stats(rc, stats_path);
  write_tables(rc, stats);
  const double i0 = rc.i0();
  std::printf("%-10s %8s %12s %12s %12s %14s  %s\n", "nu", "R", "{|u|^2}", "{||u||_1^2}", "2nu{||u||_1^2}",
              "balance", "stationarity");
  for (double nu : stats.viscosities(obs::kEnergy)) {
    const auto& e = stats.at({obs::kEnergy, nu, {}});
    const auto& h = stats.at({obs::kH1, nu, {}});
    std::string balance = "n/a";
    if (stats.find({obs::kEnergyStart, nu, {}})) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%+.3g +- %.2g", energy_balance_residual(stats, nu, i0),
                    energy_balance_stderr(stats, nu));
      balance = buf;
    }
    std::string gate = "n/a";
    if (stats.find({obs::kDrift, nu, {}})) gate = stationarity_gate(stats, nu).passed ? "ok" : "FAILED";
    std::printf("%-10.4g %8zu %12.5g %12.5g %12.5g %14s  %s\n", nu, e.count(), e.mean(), h.mean(), 2 * nu * h.mean(),
                balance.c_str(), gate.c_str());
  }
  // fitted curves of every target that the stats support
  std::vector<TargetResult> results;
  try {
    results = verify_targets(stats, rc.target_table(), rc.tolerances);
  } catch (const InsufficientData& e) {
    std::printf("no target curves: %s\n", e.what());
  }
  std::ofstream curves(rc.run_dir() / "curves.csv");
  write_curves(curves, results);
  std::printf("wrote sf.csv, spectrum.csv, flatness.csv, curves.csv under %s\n", rc.run_dir().string().c_str());
  return kOk;
}

int cmd_verify(const Common& c, const std::string& stats_path, const std::string& targets, bool run_first) {
  Common cc = c;
  if (!targets.empty()) cc.sets.push_back("analysis.targets=" + targets);
  const RunConfig rc = load(cc);
  EnsembleStats stats;
  if (run_first) {
    const int rc_run = cmd_ensemble_impl(rc, true, stats);
    if (rc_run == kGate) std::printf("warning: stationarity gate failed; brackets may be biased\n");
  } else {
    stats = load_stats(rc, stats_path);
  }
  std::vector<TargetResult> results;
  try {
    results = verify_targets(stats, rc.target_table(), rc.tolerances);
  } catch (const InsufficientData& e) {
    std::printf("FAIL: %s\n", e.what());
    return kTargets;
  }
  fs::create_directories(rc.run_dir());
  {
    std::ofstream report(rc.run_dir() / "report.csv");
    write_report(report, results);
    std::ofstream curves(rc.run_dir() / "curves.csv");
    write_curves(curves, results);
  }
  std::vector<std::string> failed;
  for (const auto& r : results) {
    std::printf("%-4s %-18s %s%s\n", r.passed ? "ok" : "FAIL", r.target.id.c_str(), r.message.c_str(),
                r.target.mandatory ? "" : " [informational]");
    if (!r.passed && r.target.mandatory) failed.push_back(r.target.id);
  }
  std::printf("wrote %s\n", (rc.run_dir() / "report.csv").string().c_str());
  if (!failed.empty()) {
    std::string list;
    for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
    std::printf("failed targets: %s\n", list.c_str());
    return kTargets;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Burgers turbulence: simulation, ensembles and scaling checks"};
  app.require_subcommand(1);

  Common sim_opts, ens_opts, ana_opts, ver_opts;
  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory; writes observables.csv and BRG1 snapshots");
  add_common(simulate, sim_opts);
  add_solver(simulate, sim_opts);

  bool resume = false;
  auto* ensemble = app.add_subcommand("ensemble", "run the viscosity sweep and write stats.csv");
  add_common(ensemble, ens_opts);
  add_solver(ensemble, ens_opts);
  ensemble->add_flag("--resume", resume, "reuse realizations whose summary.csv matches the config");

  std::string ana_stats;
  auto* analyze = app.add_subcommand("analyze", "tabulate structure functions, spectra, flatness and balances");
  add_common(analyze, ana_opts);
  analyze->add_option("--stats", ana_stats, "stats.csv to read (default: <output.dir>/<run.name>/stats.csv)");

  std::string ver_stats, ver_targets;
  bool ver_run = false;
  auto* verify = app.add_subcommand("verify", "fit the scaling targets and write report.csv");
  add_common(verify, ver_opts);
  add_solver(verify, ver_opts);
  verify->add_option("--stats", ver_stats, "stats.csv to read (default: <output.dir>/<run.name>/stats.csv)");
  verify->add_option("--targets", ver_targets, "comma-separated subset of the target table");
  verify->add_flag("--run", ver_run, "run (or resume) the ensemble first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts);
    if (*ensemble) return cmd_ensemble(ens_opts, resume);
    if (*analyze) return cmd_analyze(ana_opts, ana_stats);
    if (*verify) return cmd_verify(ver_opts, ver_stats, ver_targets, ver_run);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const BlowUp& e) {
    std::fprintf(stderr, "blow-up: %s\n", e.what());
    return kBlowUp;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
