#include "burgers/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_fits(const ForcingSpec& spec, std::size_t n_points) {
  if (spec.max_mode() > dealias_cutoff(n_points)) {
    throw Error("forcing has modes above the dealiasing cutoff of an N=" + std::to_string(n_points) + " grid");
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

ForcingSpec ForcingSpec::exponential(double kf, int cutoff, double i0_target, ChannelConvention convention) {
  if (!(kf > 0.0)) throw ConfigError("forcing.kf must be positive");
  if (cutoff < 1) throw ConfigError("forcing.cutoff must be >= 1");
  if (i0_target < 0.0) throw ConfigError("forcing.i0_target must be >= 0");
  ForcingSpec spec;
  spec.convention = convention;
  spec.b.resize(static_cast<std::size_t>(cutoff));
  for (int k = 1; k <= cutoff; ++k) spec.b[static_cast<std::size_t>(k - 1)] = std::exp(-k / kf);
  const double unit = trace(spec, 0);
  const double scale = std::sqrt(i0_target / unit);
  for (double& v : spec.b) v *= scale;
  return spec;
}

ForcingSpec ForcingSpec::from_amplitudes(std::vector<double> b, ChannelConvention convention) {
  for (double v : b) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("forcing.b entries must be finite and nonnegative");
  }
  return {std::move(b), convention};
}

bool ForcingSpec::is_zero() const {
  return std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
}

double trace(const ForcingSpec& spec, int m) {
  if (m < 0) throw Error("trace: m must be >= 0");
  double sum = 0.0;
  for (long k = 1; k <= spec.max_mode(); ++k) {
    const double bk = spec.amplitude(k);
    sum += bk * bk * std::pow(kTwoPi * static_cast<double>(k), 2 * m);
  }
  // two channels per mode, each carrying channel_factor() * b_k^2
  return 2.0 * spec.channel_factor() * sum;
}

SeedStream::SeedStream(std::uint64_t master_seed, std::uint64_t realization_index)
    : master_seed_(master_seed),
      realization_index_(realization_index),
      stream_id_(splitmix64(master_seed ^ splitmix64(realization_index + 0x632BE59BD9B4E019ULL))),
      engine_(stream_id_) {}

void add_channel_noise(std::span<const double> std_dev, std::span<Complex> modes, SeedStream& stream) {
  // sqrt2 sigma (xi_c cos + xi_s sin) has Fourier coefficient (sigma/sqrt2)(xi_c - i xi_s) at +k.
  for (std::size_t i = 0; i < std_dev.size(); ++i) {
    const double xc = stream.gaussian();
    const double xs = stream.gaussian();
    const double a = std_dev[i] * std::numbers::sqrt2 / 2.0;
    modes[i] += Complex{a * xc, -a * xs};
  }
}

Field sample_increment(const ForcingSpec& spec, double dt, std::size_t n_points, SeedStream& stream) {
  if (!(dt > 0.0)) throw Error("sample_increment: dt must be positive");
  check_fits(spec, n_points);
  std::vector<double> sd(static_cast<std::size_t>(spec.max_mode()));
  for (long k = 1; k <= spec.max_mode(); ++k) {
    sd[static_cast<std::size_t>(k - 1)] = spec.amplitude(k) * std::sqrt(spec.channel_factor() * dt);
  }
  std::vector<Complex> c(n_points / 2 + 1);
  add_channel_noise(sd, std::span<Complex>(c).subspan(1), stream);
  return Field::from_coeffs(n_points, std::move(c));
}

double ou_channel_variance(const ForcingSpec& spec, long k, double nu, double dt) {
  const double bk = spec.amplitude(k);
  const double lambda = std::pow(kTwoPi * static_cast<double>(k), 2);
  const double rate = 2.0 * nu * lambda;
  return spec.channel_factor() * bk * bk * (-std::expm1(-rate * dt)) / rate;
}

Field ou_noise_increment(const ForcingSpec& spec, double nu, double dt, std::size_t n_points, SeedStream& stream) {
  if (!(dt > 0.0)) throw Error("ou_noise_increment: dt must be positive");
  if (!(nu > 0.0)) throw Error("ou_noise_increment: nu must be positive");
  check_fits(spec, n_points);
  std::vector<double> sd(static_cast<std::size_t>(spec.max_mode()));
  for (long k = 1; k <= spec.max_mode(); ++k) {
    sd[static_cast<std::size_t>(k - 1)] = std::sqrt(ou_channel_variance(spec, k, nu, dt));
  }
  std::vector<Complex> c(n_points / 2 + 1);
  add_channel_noise(sd, std::span<Complex>(c).subspan(1), stream);
  return Field::from_coeffs(n_points, std::move(c));
}

}  // namespace burgers
