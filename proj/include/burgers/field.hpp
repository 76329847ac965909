#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace burgers {

using Complex = std::complex<double>;

/// Real FFT of fixed size on the unit circle.
///
/// Normalisation: forward(u)[k] = (1/N) sum_j u_j e^{-2 pi i k j / N}, which is
/// the trapezoid approximation of the Fourier integral over [0,1), so the
/// coefficients coincide with the continuous ones for band-limited data.
/// inverse() is the exact inverse of forward(). Only modes k = 0..N/2 are
/// stored; negative modes follow from conjugate symmetry.
///
/// Instances own FFTW plans and aligned scratch buffers and must not be shared
/// between threads. for_size() hands out a per-thread cached instance.
class SpectralTransform {
 public:
  explicit SpectralTransform(std::size_t n_points);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  std::size_t size() const { return n_; }
  std::size_t n_modes() const { return n_ / 2 + 1; }

  void forward(std::span<const double> samples, std::span<Complex> coeffs);
  void inverse(std::span<const Complex> coeffs, std::span<double> samples);

  static SpectralTransform& for_size(std::size_t n_points);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

/// One snapshot u(t, .) on the uniform grid x_j = j/N, carried both as samples
/// and as the half spectrum k = 0..N/2 (coeffs[k] = integral of u e^{-2 pi i k x}).
/// Both representations are kept consistent by construction; a Field is always
/// zero-mean.
class Field {
 public:
  Field() = default;

  /// Zero field on n_points samples.
  static Field zero(std::size_t n_points);
  /// Builds the spectral side from samples. A mean below the round-off
  /// tolerance is removed exactly, a larger one raises NonZeroMean.
  static Field from_samples(std::vector<double> samples);
  /// Builds samples from a half spectrum of length n_points/2+1.
  static Field from_coeffs(std::size_t n_points, std::vector<Complex> half_spectrum);
  /// Evaluates a callable on the grid and transforms it.
  template <typename F>
  static Field from_function(std::size_t n_points, F&& u) {
    std::vector<double> s(n_points);
    for (std::size_t j = 0; j < n_points; ++j) s[j] = u(static_cast<double>(j) / static_cast<double>(n_points));
    return from_samples(std::move(s));
  }

  std::size_t n_points() const { return samples_.size(); }
  long max_mode() const { return static_cast<long>(n_points() / 2); }
  double grid_spacing() const { return 1.0 / static_cast<double>(n_points()); }

  std::span<const double> samples() const { return samples_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  /// Coefficient for any |k| <= N/2, using conj symmetry for k < 0.
  Complex coeff(long k) const;

  double max_abs() const;

 private:
  std::vector<double> samples_;
  std::vector<Complex> coeffs_;
};

/// Tolerance on |u^0| below which a mean is treated as round-off.
double mean_tolerance(std::span<const double> samples);

/// Samples -> Field with the spectral side filled (see Field::from_samples).
Field to_spectral(std::vector<double> samples);

/// m-th spatial derivative: coeffs multiplied by (2 pi i k)^order. The Nyquist
/// mode is dropped for odd orders since (2 pi i N/2)^order is not real.
Field derivative(const Field& field, int order);

/// Highest mode kept by the two-thirds rule.
long dealias_cutoff(std::size_t n_points);

/// Zeroes every mode with |k| > N/3.
Field dealias(const Field& field);

/// Spectral shift: returns x -> u(x + shift) for arbitrary real shift.
Field shifted(const Field& field, double shift);

/// Sum over all k of |u^k|^2 (equals |u|_2^2 by Parseval).
double spectral_energy(std::span<const Complex> half_spectrum, std::size_t n_points);

}  // namespace burgers
