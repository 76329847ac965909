#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "burgers/field.hpp"

namespace burgers {

/// How the amplitude b_k is split between the cos and sin channels of mode k.
///  - PairShared: each channel has intensity b_k^2 / 2, so E||w(1)||_m^2 =
///    sum_k b_k^2 (2 pi k)^{2m} (single-sum trace).
///  - PerChannel: each channel has intensity b_k^2, doubling the trace.
enum class ChannelConvention { PairShared, PerChannel };

/// Diagonal Wiener process w(t) = sum_k sqrt2 b_k (W_k^c cos 2 pi k x + W_k^s sin 2 pi k x).
struct ForcingSpec {
  std::vector<double> b;  // b[k-1] is the amplitude of mode k >= 1
  ChannelConvention convention = ChannelConvention::PairShared;

  /// b_k = A exp(-k/kf) for k <= cutoff, with A set so that I_0 = i0_target.
  static ForcingSpec exponential(double kf = 4.0, int cutoff = 32, double i0_target = 1.0,
                                 ChannelConvention convention = ChannelConvention::PairShared);
  static ForcingSpec from_amplitudes(std::vector<double> b,
                                     ChannelConvention convention = ChannelConvention::PairShared);

  long max_mode() const { return static_cast<long>(b.size()); }
  double amplitude(long k) const { return (k >= 1 && k <= max_mode()) ? b[static_cast<std::size_t>(k - 1)] : 0.0; }
  /// Variance per unit time of one channel, in units of b_k^2.
  double channel_factor() const { return convention == ChannelConvention::PairShared ? 0.5 : 1.0; }
  bool is_zero() const;
};

/// I_m = E ||w(1)||_m^2.
double trace(const ForcingSpec& spec, int m);

/// Per-realization Gaussian stream. The engine is seeded from a hash of
/// (master_seed, realization_index), so streams are reproducible and
/// independent of scheduling.
class SeedStream {
 public:
  SeedStream(std::uint64_t master_seed, std::uint64_t realization_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t realization_index() const { return realization_index_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double gaussian() { return normal_(engine_); }

 private:
  std::uint64_t master_seed_;
  std::uint64_t realization_index_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// w(t+dt) - w(t) on an n_points grid.
Field sample_increment(const ForcingSpec& spec, double dt, std::size_t n_points, SeedStream& stream);

/// Variance of one channel of the exact stochastic convolution over dt:
/// c b_k^2 (1 - exp(-2 nu lambda dt)) / (2 nu lambda), lambda = (2 pi k)^2.
double ou_channel_variance(const ForcingSpec& spec, long k, double nu, double dt);

/// Exact stochastic convolution int_t^{t+dt} e^{-nu L (t+dt-s)} dw(s), as a Field.
Field ou_noise_increment(const ForcingSpec& spec, double nu, double dt, std::size_t n_points, SeedStream& stream);

/// Adds the channel draws for modes k = 1..K, given per-channel standard
/// deviations std_dev[k-1], to modes[k-1].
void add_channel_noise(std::span<const double> std_dev, std::span<Complex> modes, SeedStream& stream);

}  // namespace burgers
