#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "burgers/field.hpp"
#include "burgers/forcing.hpp"

namespace burgers {

enum class FluxKind { Classical, SoftenedQuartic };

/// Flux f with f'' >= sigma > 0 and |f'(u)| <= C (1+|u|)^{h1}.
///   classical:        f(u) = u^2/2
///   softened_quartic: f(u) = u^2/2 + a (sqrt(1+u^2) - 1),  a >= 0
struct FluxSpec {
  FluxKind kind = FluxKind::Classical;
  double a = 0.0;

  static FluxSpec classical() { return {}; }
  static FluxSpec softened_quartic(double a);

  double f(double u) const;
  double fprime(double u) const;
  double fsecond(double u) const;

  double sigma() const { return 1.0; }
  double h1() const { return 1.0; }
  double delta() const { return 2.0 - h1(); }
};

struct DtPolicy {
  enum class Mode { Fixed, Cfl };
  Mode mode = Mode::Cfl;
  double dt = 0.0;          // Fixed mode step
  double cfl_safety = 0.4;  // dt <= safety * dx / max(1, max|f'(u)|)

  static DtPolicy fixed(double dt) { return {Mode::Fixed, dt, 0.4}; }
  static DtPolicy cfl(double safety = 0.4) { return {Mode::Cfl, 0.0, safety}; }
};

struct SimConfig {
  double nu = 1e-2;
  std::size_t n_points = 2048;
  FluxSpec flux;
  ForcingSpec forcing = ForcingSpec::exponential();
  DtPolicy dt_policy;
  double t_end = 10.0;
  double snapshot_stride = 1.0;  // 0 disables snapshots after the initial one
  double observe_stride = 0.0;   // 0 records observables after every step
  std::uint64_t seed = 1;
  std::optional<double> blowup_guard;  // defaults to 1000 max(sqrt(I0), |u0|_inf, 1)
  bool nonlinearity = true;            // test hook: false integrates heat + noise only

  /// Throws ConfigError naming the violated constraint.
  void validate(const Field* initial = nullptr) const;
  double grid_spacing() const { return 1.0 / static_cast<double>(n_points); }
  double cfl_limit(double max_speed) const;
};

/// Smallest power-of-two grid meeting the resolution rule N >= 16/nu.
std::size_t resolution_for(double nu);

/// Per-step observables: |u|_2^2, ||u||_1^2, ||u||_2^2, |u|_inf, |u|_{1,1}, max u_x.
struct ObservableRecord {
  double t = 0.0;
  double energy = 0.0;
  double h1_sq = 0.0;
  double h2_sq = 0.0;
  double linf = 0.0;
  double w11 = 0.0;
  double max_slope = 0.0;
};

ObservableRecord record_observables(const Field& field, double t);

struct TimedField {
  double t;
  Field field;
};

struct Trajectory {
  std::vector<TimedField> snapshots;
  std::vector<ObservableRecord> records;
};

/// Dealiased spectral representation of -f'(u) u_x = -(f(u))_x.
Field nonlinear_term(const Field& field, const FluxSpec& flux);

/// One step of the exponential integrator:
///   u^k <- exp(-nu lambda_k dt) (u^k + dt N^k) + exact OU increment.
Field step(const Field& state, double dt, const SimConfig& config, SeedStream& stream);

/// Integrates one or more states driven by the same noise path with a shared
/// time step (the minimum over states of the CFL limit).
class Simulation {
 public:
  Simulation(SimConfig config, SeedStream stream, std::vector<Field> initial = {});
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  const SimConfig& config() const { return config_; }
  double time() const { return t_; }
  std::size_t steps() const { return steps_; }
  std::size_t n_states() const;
  double blowup_guard() const { return guard_; }
  const SeedStream& stream() const { return stream_; }

  /// Advances by one step, never passing t_limit (landing on it exactly when
  /// the step would overshoot). Throws BlowUp.
  void step_once(double t_limit);
  void advance_to(double t_target);

  std::span<const Complex> coeffs(std::size_t i = 0) const;
  /// Physical samples of state i at the current time.
  std::span<const double> samples(std::size_t i = 0);
  Field field(std::size_t i = 0) const;

 private:
  struct StateBuffers;
  struct Workspace;
  void sync_physical(std::size_t i);

  SimConfig config_;
  SeedStream stream_;
  double t_ = 0.0;
  std::size_t steps_ = 0;
  double guard_ = 0.0;
  std::vector<StateBuffers> states_;
  std::unique_ptr<Workspace> ws_;
};

/// Integrates to t_end from u0 (zero field by default), recording a snapshot
/// every snapshot_stride and observables every observe_stride. Deterministic
/// in (config, stream).
Trajectory run(const SimConfig& config, SeedStream stream, std::optional<Field> u0 = {});

}  // namespace burgers
