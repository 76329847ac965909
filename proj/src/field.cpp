#include "burgers/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

// The FFTW planner is not thread safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectralTransform::Plans {
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

SpectralTransform::SpectralTransform(std::size_t n_points) : n_(n_points), plans_(std::make_unique<Plans>()) {
  if (n_points < 2 || n_points % 2 != 0) {
    throw Error("SpectralTransform: n_points must be even and >= 2, got " + std::to_string(n_points));
  }
  std::lock_guard lock(planner_mutex());
  plans_->real_buf = fftw_alloc_real(n_);
  plans_->cplx_buf = fftw_alloc_complex(n_modes());
  const int n = static_cast<int>(n_);
  const unsigned flags = FFTW_ESTIMATE;
  plans_->r2c = fftw_plan_dft_r2c_1d(n, plans_->real_buf, plans_->cplx_buf, flags);
  plans_->c2r = fftw_plan_dft_c2r_1d(n, plans_->cplx_buf, plans_->real_buf, flags);
}

SpectralTransform::~SpectralTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->r2c);
  fftw_destroy_plan(plans_->c2r);
  fftw_free(plans_->real_buf);
  fftw_free(plans_->cplx_buf);
}

void SpectralTransform::forward(std::span<const double> samples, std::span<Complex> coeffs) {
  std::copy(samples.begin(), samples.end(), plans_->real_buf);
  fftw_execute(plans_->r2c);
  const double scale = 1.0 / static_cast<double>(n_);
  const auto* src = reinterpret_cast<const Complex*>(plans_->cplx_buf);
  for (std::size_t k = 0; k < n_modes(); ++k) coeffs[k] = src[k] * scale;
}

void SpectralTransform::inverse(std::span<const Complex> coeffs, std::span<double> samples) {
  auto* dst = reinterpret_cast<Complex*>(plans_->cplx_buf);
  std::copy(coeffs.begin(), coeffs.end(), dst);
  fftw_execute(plans_->c2r);
  std::copy(plans_->real_buf, plans_->real_buf + n_, samples.begin());
}

SpectralTransform& SpectralTransform::for_size(std::size_t n_points) {
  thread_local std::map<std::size_t, std::unique_ptr<SpectralTransform>> cache;
  auto& slot = cache[n_points];
  if (!slot) slot = std::make_unique<SpectralTransform>(n_points);
  return *slot;
}

double mean_tolerance(std::span<const double> samples) {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  return 1e-13 * std::max(1.0, peak);
}

Field Field::zero(std::size_t n_points) {
  if (n_points < 2 || n_points % 2 != 0) throw Error("Field: n_points must be even and >= 2");
  Field f;
  f.samples_.assign(n_points, 0.0);
  f.coeffs_.assign(n_points / 2 + 1, Complex{});
  return f;
}

Field Field::from_samples(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n < 2 || n % 2 != 0) throw Error("Field: sample count must be even and >= 2, got " + std::to_string(n));
  Field f;
  f.coeffs_.resize(n / 2 + 1);
  SpectralTransform::for_size(n).forward(samples, f.coeffs_);
  const double mean = f.coeffs_[0].real();
  const double tol = mean_tolerance(samples);
  if (std::abs(mean) > tol) {
    std::ostringstream msg;
    msg << "non-zero spatial mean " << mean << " exceeds tolerance " << tol;
    throw NonZeroMean(msg.str());
  }
  if (mean != 0.0) {
    for (double& v : samples) v -= mean;
  }
  f.coeffs_[0] = Complex{};
  f.coeffs_[n / 2] = Complex{f.coeffs_[n / 2].real(), 0.0};
  f.samples_ = std::move(samples);
  return f;
}

Field Field::from_coeffs(std::size_t n_points, std::vector<Complex> half_spectrum) {
  if (n_points < 2 || n_points % 2 != 0) throw Error("Field: n_points must be even and >= 2");
  if (half_spectrum.size() != n_points / 2 + 1) {
    throw Error("Field: half spectrum must have n_points/2+1 entries");
  }
  const double tol = 1e-13 * std::max(1.0, std::abs(half_spectrum[0]));
  if (std::abs(half_spectrum[0]) > tol) {
    throw NonZeroMean("non-zero mean coefficient in spectral data");
  }
  half_spectrum[0] = Complex{};
  half_spectrum[n_points / 2] = Complex{half_spectrum[n_points / 2].real(), 0.0};
  Field f;
  f.samples_.resize(n_points);
  SpectralTransform::for_size(n_points).inverse(half_spectrum, f.samples_);
  f.coeffs_ = std::move(half_spectrum);
  return f;
}

Complex Field::coeff(long k) const {
  const long kmax = max_mode();
  if (k > kmax || k < -kmax) return Complex{};
  return k >= 0 ? coeffs_[static_cast<std::size_t>(k)] : std::conj(coeffs_[static_cast<std::size_t>(-k)]);
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

Field to_spectral(std::vector<double> samples) { return Field::from_samples(std::move(samples)); }

Field derivative(const Field& field, int order) {
  if (order < 1) throw Error("derivative: order must be >= 1");
  const std::size_t n = field.n_points();
  std::vector<Complex> c(field.coeffs().begin(), field.coeffs().end());
  const Complex two_pi_i{0.0, 2.0 * std::numbers::pi};
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] *= std::pow(two_pi_i * static_cast<double>(k), order);
  }
  if (order % 2 == 1) c[n / 2] = Complex{};
  return Field::from_coeffs(n, std::move(c));
}

long dealias_cutoff(std::size_t n_points) { return static_cast<long>(n_points / 3); }

Field dealias(const Field& field) {
  const std::size_t n = field.n_points();
  std::vector<Complex> c(field.coeffs().begin(), field.coeffs().end());
  const auto cutoff = static_cast<std::size_t>(dealias_cutoff(n));
  for (std::size_t k = cutoff + 1; k < c.size(); ++k) c[k] = Complex{};
  return Field::from_coeffs(n, std::move(c));
}

Field shifted(const Field& field, double shift) {
  const std::size_t n = field.n_points();
  std::vector<Complex> c(field.coeffs().begin(), field.coeffs().end());
  for (std::size_t k = 1; k < c.size(); ++k) {
    c[k] *= std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) * shift);
  }
  // A shifted Nyquist mode is complex and cannot be represented; keep its cosine part.
  c[n / 2] = Complex{c[n / 2].real(), 0.0};
  return Field::from_coeffs(n, std::move(c));
}

double spectral_energy(std::span<const Complex> half_spectrum, std::size_t n_points) {
  double sum = 0.0;
  const std::size_t nyq = n_points / 2;
  for (std::size_t k = 1; k < nyq; ++k) sum += 2.0 * std::norm(half_spectrum[k]);
  sum += std::norm(half_spectrum[nyq]);
  return sum;
}

}  // namespace burgers
