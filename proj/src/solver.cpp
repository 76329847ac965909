#include "burgers/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "burgers/errors.hpp"
#include "burgers/norms.hpp"

namespace burgers {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Deep dissipation-range modes decay geometrically into subnormal numbers,
// which are slow on x86 in both the update loop and the FFT.
double flush_tiny(double v) { return std::abs(v) < 1e-250 ? 0.0 : v; }

// Four independent accumulators let the reduction vectorise.
double max_abs(std::span<const double> v) {
  double m[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= v.size(); j += 4) {
    for (std::size_t r = 0; r < 4; ++r) m[r] = std::max(m[r], std::abs(v[j + r]));
  }
  for (; j < v.size(); ++j) m[0] = std::max(m[0], std::abs(v[j]));
  return std::max(std::max(m[0], m[1]), std::max(m[2], m[3]));
}

}  // namespace

// ---------------------------------------------------------------------------
// Flux

FluxSpec FluxSpec::softened_quartic(double a) {
  if (!(a >= 0.0)) throw ConfigError("solver.flux_a must be >= 0");
  return {FluxKind::SoftenedQuartic, a};
}

double FluxSpec::f(double u) const {
  const double base = 0.5 * u * u;
  if (kind == FluxKind::Classical) return base;
  return base + a * (std::sqrt(1.0 + u * u) - 1.0);
}

double FluxSpec::fprime(double u) const {
  if (kind == FluxKind::Classical) return u;
  return u + a * u / std::sqrt(1.0 + u * u);
}

double FluxSpec::fsecond(double u) const {
  if (kind == FluxKind::Classical) return 1.0;
  return 1.0 + a / std::pow(1.0 + u * u, 1.5);
}

// ---------------------------------------------------------------------------
// Configuration

double SimConfig::cfl_limit(double max_speed) const {
  return dt_policy.cfl_safety * grid_spacing() / std::max(1.0, max_speed);
}

std::size_t resolution_for(double nu) {
  std::size_t n = 16;
  while (static_cast<double>(n) < 16.0 / nu) n *= 2;
  return n;
}

void SimConfig::validate(const Field* initial) const {
  std::ostringstream msg;
  if (!(nu > 0.0 && nu <= 1.0)) {
    msg << "solver.nu = " << nu << " violates nu in (0,1]";
    throw ConfigError(msg.str());
  }
  if (!is_power_of_two(n_points) || n_points < 16) {
    msg << "solver.n = " << n_points << " must be a power of two >= 16";
    throw ConfigError(msg.str());
  }
  if (static_cast<double>(n_points) < 16.0 / nu) {
    msg << "resolution rule N >= 16/nu violated: N = " << n_points << " < " << 16.0 / nu;
    throw ConfigError(msg.str());
  }
  if (forcing.max_mode() > dealias_cutoff(n_points)) {
    msg << "forcing cutoff " << forcing.max_mode() << " exceeds the dealiasing cutoff N/3 = " << dealias_cutoff(n_points);
    throw ConfigError(msg.str());
  }
  if (!(t_end >= 0.0)) throw ConfigError("solver.t_end must be >= 0");
  if (!(snapshot_stride >= 0.0)) throw ConfigError("solver.snapshot_stride must be >= 0");
  if (!(observe_stride >= 0.0)) throw ConfigError("solver.observe_stride must be >= 0");
  if (!(dt_policy.cfl_safety > 0.0 && dt_policy.cfl_safety <= 1.0)) {
    throw ConfigError("solver.cfl must lie in (0,1]");
  }
  if (initial && initial->n_points() != n_points) {
    throw ConfigError("initial condition has a different grid size than solver.n");
  }
  if (dt_policy.mode == DtPolicy::Mode::Fixed) {
    if (!(dt_policy.dt > 0.0)) throw ConfigError("solver.dt must be positive");
    if (!nonlinearity) return;  // the linear and noise parts are integrated exactly
    double speed = 0.0;
    if (initial) {
      for (double u : initial->samples()) speed = std::max(speed, std::abs(flux.fprime(u)));
    }
    const double limit = cfl_limit(speed);
    if (dt_policy.dt > limit) {
      msg << "CFL constraint dt <= " << dt_policy.cfl_safety << " * dx / max(1, max|f'(u)|) = " << limit
          << " violated by solver.dt = " << dt_policy.dt;
      throw ConfigError(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Stateless operations

ObservableRecord record_observables(const Field& field, double t) {
  ObservableRecord r;
  r.t = t;
  r.energy = spectral_energy(field.coeffs(), field.n_points());
  const double h1 = norm(field, Hs{1.0});
  const double h2 = norm(field, Hs{2.0});
  r.h1_sq = h1 * h1;
  r.h2_sq = h2 * h2;
  r.linf = lp_norm(field.samples(), kInfinity);
  const Field ux = derivative(field, 1);
  r.w11 = lp_norm(ux.samples(), 1.0);
  r.max_slope = *std::max_element(ux.samples().begin(), ux.samples().end());
  return r;
}

Field nonlinear_term(const Field& field, const FluxSpec& flux) {
  const std::size_t n = field.n_points();
  const Field u = dealias(field);
  std::vector<double> fu(n);
  const auto s = u.samples();
  for (std::size_t j = 0; j < n; ++j) fu[j] = flux.f(s[j]);
  std::vector<Complex> c(n / 2 + 1);
  SpectralTransform::for_size(n).forward(fu, c);
  const auto cutoff = static_cast<std::size_t>(dealias_cutoff(n));
  c[0] = Complex{};
  for (std::size_t k = 1; k < c.size(); ++k) {
    c[k] = (k <= cutoff) ? -Complex{0.0, kTwoPi * static_cast<double>(k)} * c[k] : Complex{};
  }
  return Field::from_coeffs(n, std::move(c));
}

Field step(const Field& state, double dt, const SimConfig& config, SeedStream& stream) {
  SimConfig cfg = config;
  cfg.dt_policy = DtPolicy::fixed(dt);
  cfg.dt_policy.cfl_safety = config.dt_policy.cfl_safety;
  Simulation sim(cfg, stream, {state});
  sim.step_once(dt);
  stream = sim.stream();
  return sim.field();
}

// ---------------------------------------------------------------------------
// Simulation

struct Simulation::StateBuffers {
  std::vector<Complex> coeffs;
  std::vector<double> samples;
  double peak = 0.0;  // max|u| of samples
  bool physical_valid = false;
};

struct Simulation::Workspace {
  struct Factors {
    std::vector<double> decay;     // k = 0..cutoff
    std::vector<double> noise_sd;  // k = 1..K (channel standard deviation)
  };

  explicit Workspace(std::size_t n) : transform(n), flux(n), flux_hat(n / 2 + 1) {}

  SpectralTransform transform;
  std::vector<double> flux;
  std::vector<Complex> flux_hat;
  std::vector<Complex> noise;
  std::map<int, Factors> cache;  // keyed by CFL ladder rung
  Factors scratch;
};

Simulation::Simulation(SimConfig config, SeedStream stream, std::vector<Field> initial)
    : config_(std::move(config)), stream_(stream) {
  if (initial.empty()) initial.push_back(Field::zero(config_.n_points));
  for (const auto& f : initial) config_.validate(&f);
  double peak = 0.0;
  for (const auto& f : initial) peak = std::max(peak, f.max_abs());
  guard_ = config_.blowup_guard.value_or(1000.0 * std::max({std::sqrt(trace(config_.forcing, 0)), peak, 1.0}));

  const std::size_t n = config_.n_points;
  const auto cutoff = static_cast<std::size_t>(dealias_cutoff(n));
  for (const auto& f : initial) {
    StateBuffers s;
    s.coeffs.assign(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t k = cutoff + 1; k < s.coeffs.size(); ++k) s.coeffs[k] = Complex{};
    s.samples.resize(n);
    states_.push_back(std::move(s));
  }
  ws_ = std::make_unique<Workspace>(n);
  ws_->noise.resize(static_cast<std::size_t>(config_.forcing.max_mode()));
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

void Simulation::sync_physical(std::size_t i) {
  auto& s = states_[i];
  if (s.physical_valid) return;
  ws_->transform.inverse(s.coeffs, s.samples);
  s.physical_valid = true;
  // A non-finite coefficient spreads to every sample through the inverse
  // transform, so one sample is enough to detect it.
  const double peak = max_abs(s.samples);
  s.peak = peak;
  if (!std::isfinite(s.samples[0]) || !(peak <= guard_)) {
    std::ostringstream msg;
    msg << "blow-up at t = " << t_ << ": max|u| = " << peak << " exceeds guard " << guard_;
    throw BlowUp(msg.str(), t_);
  }
}

std::size_t Simulation::n_states() const { return states_.size(); }

std::span<const Complex> Simulation::coeffs(std::size_t i) const { return states_.at(i).coeffs; }

std::span<const double> Simulation::samples(std::size_t i) {
  sync_physical(i);
  return states_[i].samples;
}

Field Simulation::field(std::size_t i) const {
  return Field::from_coeffs(config_.n_points, states_.at(i).coeffs);
}

void Simulation::step_once(double t_limit) {
  const std::size_t n = config_.n_points;
  const bool classical = config_.flux.kind == FluxKind::Classical;
  double speed = 0.0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    sync_physical(i);
    const auto& u = states_[i].samples;
    if (classical) {
      speed = std::max(speed, states_[i].peak);
    } else {
      for (double v : u) speed = std::max(speed, std::abs(config_.flux.fprime(v)));
    }
  }

  const double remaining = t_limit - t_;
  if (!(remaining > 0.0)) return;

  // CFL steps come from the ladder dt_max 2^{-j/8} so that per-mode factors
  // can be cached by j; the last step before t_limit is clipped.
  double dt;
  int rung = 0;
  if (config_.dt_policy.mode == DtPolicy::Mode::Fixed) {
    dt = config_.dt_policy.dt;
  } else {
    const double dt_max = config_.cfl_limit(0.0);
    const double limit = config_.cfl_limit(speed);
    rung = std::max(0, static_cast<int>(std::ceil(8.0 * std::log2(dt_max / limit) - 1e-9)));
    dt = dt_max * std::exp2(-rung / 8.0);
    while (dt > limit) dt = dt_max * std::exp2(-(++rung) / 8.0);
  }
  bool clipped = false;
  if (dt >= remaining * (1.0 - 1e-12)) {
    dt = remaining;
    clipped = true;
  }

  const auto cutoff = static_cast<std::size_t>(dealias_cutoff(n));
  const long kf = config_.forcing.max_mode();
  auto build = [&](Workspace::Factors& fac) {
    fac.decay.resize(cutoff + 1);
    for (std::size_t k = 0; k <= cutoff; ++k) {
      const double lambda = std::pow(kTwoPi * static_cast<double>(k), 2);
      fac.decay[k] = std::exp(-config_.nu * lambda * dt);
    }
    fac.noise_sd.resize(static_cast<std::size_t>(kf));
    for (long k = 1; k <= kf; ++k) {
      fac.noise_sd[static_cast<std::size_t>(k - 1)] = std::sqrt(ou_channel_variance(config_.forcing, k, config_.nu, dt));
    }
  };
  const Workspace::Factors* fac;
  if (clipped) {
    build(ws_->scratch);
    fac = &ws_->scratch;
  } else {
    auto it = ws_->cache.find(rung);
    if (it == ws_->cache.end()) {
      it = ws_->cache.emplace(rung, Workspace::Factors{}).first;
      build(it->second);
    }
    fac = &it->second;
  }

  const bool forced = !config_.forcing.is_zero();
  if (forced) {
    std::fill(ws_->noise.begin(), ws_->noise.end(), Complex{});
    add_channel_noise(fac->noise_sd, ws_->noise, stream_);
  }

  for (auto& s : states_) {
    auto& c = s.coeffs;
    if (config_.nonlinearity) {
      const auto& u = s.samples;
      if (classical) {
        for (std::size_t j = 0; j < n; ++j) ws_->flux[j] = 0.5 * u[j] * u[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) ws_->flux[j] = config_.flux.f(u[j]);
      }
      ws_->transform.forward(ws_->flux, ws_->flux_hat);
      // u^k <- decay_k (u^k - i 2 pi k dt F^k), written out to avoid the
      // NaN-propagating complex multiply
      for (std::size_t k = 1; k <= cutoff; ++k) {
        const double w = kTwoPi * static_cast<double>(k) * dt;
        const double re = fac->decay[k] * (c[k].real() + w * ws_->flux_hat[k].imag());
        const double im = fac->decay[k] * (c[k].imag() - w * ws_->flux_hat[k].real());
        c[k] = Complex{flush_tiny(re), flush_tiny(im)};
      }
    } else {
      for (std::size_t k = 1; k <= cutoff; ++k) {
        c[k] = Complex{flush_tiny(fac->decay[k] * c[k].real()), flush_tiny(fac->decay[k] * c[k].imag())};
      }
    }
    c[0] = Complex{};
    for (std::size_t k = cutoff + 1; k < c.size(); ++k) c[k] = Complex{};
    if (forced) {
      for (std::size_t k = 1; k <= static_cast<std::size_t>(kf); ++k) c[k] += ws_->noise[k - 1];
    }
    s.physical_valid = false;
  }

  t_ = clipped ? t_limit : t_ + dt;
  ++steps_;
}

void Simulation::advance_to(double t_target) {
  while (t_ < t_target) step_once(t_target);
}

// ---------------------------------------------------------------------------

Trajectory run(const SimConfig& config, SeedStream stream, std::optional<Field> u0) {
  std::vector<Field> init;
  if (u0) init.push_back(std::move(*u0));
  Simulation sim(config, stream, std::move(init));
  Trajectory traj;
  {
    Field f = sim.field();
    traj.records.push_back(record_observables(f, 0.0));
    traj.snapshots.push_back({0.0, std::move(f)});
  }
  const double t_end = config.t_end;
  const double snap = config.snapshot_stride;
  const double obs = config.observe_stride;
  std::size_t next_snap_idx = 1;
  std::size_t next_obs_idx = 1;
  auto next_snap = [&] { return snap > 0.0 ? std::min(t_end, snap * static_cast<double>(next_snap_idx)) : t_end; };
  auto next_obs = [&] { return obs > 0.0 ? std::min(t_end, obs * static_cast<double>(next_obs_idx)) : t_end; };

  while (sim.time() < t_end) {
    const double limit = std::min(next_snap(), next_obs());
    try {
      sim.step_once(limit);
    } catch (const BlowUp& e) {
      throw BlowUp(e.what(), sim.time());
    }
    const double t = sim.time();
    const bool at_obs = obs == 0.0 || t >= next_obs();
    const bool at_snap = (snap > 0.0 && t >= next_snap()) || t >= t_end;
    if (at_obs || at_snap) {
      sim.samples();  // blow-up check on the new state
      Field f = sim.field();
      if (at_obs || t >= t_end) traj.records.push_back(record_observables(f, t));
      if (at_snap) traj.snapshots.push_back({t, std::move(f)});
    }
    while (obs > 0.0 && next_obs() <= t && next_obs() < t_end) ++next_obs_idx;
    while (snap > 0.0 && next_snap() <= t && next_snap() < t_end) ++next_snap_idx;
  }
  return traj;
}

}  // namespace burgers
