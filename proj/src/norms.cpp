#include "burgers/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

constexpr double kResolvedEnergy = 0.9999;
constexpr long kResolutionMargin = 8;

void require_resolved(const Field& field, double order) {
  if (order < 3.0) return;
  const double frac = unresolved_energy_fraction(field);
  if (frac > 1.0 - kResolvedEnergy) {
    std::ostringstream msg;
    msg << "field under-resolved for derivative order " << order << ": " << frac
        << " of the energy lies within " << kResolutionMargin << " modes of the dealiasing cutoff or above";
    throw UnresolvedField(msg.str());
  }
}

double refined_peak(std::span<const double> v) {
  const std::size_t n = v.size();
  std::size_t imax = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs(v[j]) > std::abs(v[imax])) imax = j;
  }
  const double c = std::abs(v[imax]);
  const double sgn = v[imax] >= 0 ? 1.0 : -1.0;
  const double a = sgn * v[(imax + n - 1) % n];
  const double b = sgn * v[(imax + 1) % n];
  const double curv = a - 2.0 * c + b;
  if (curv >= 0.0) return c;
  const double offset = 0.5 * (a - b) / curv;
  return c - 0.25 * (a - b) * offset;
}

double sobolev_spectral(const Field& field, double s) {
  const auto c = field.coeffs();
  const std::size_t nyq = field.n_points() / 2;
  double sum = 0.0;
  for (std::size_t k = 1; k <= nyq; ++k) {
    const double weight = (k == nyq) ? 1.0 : 2.0;
    sum += weight * std::pow(static_cast<double>(k), 2.0 * s) * std::norm(c[k]);
  }
  return std::pow(2.0 * std::numbers::pi, s) * std::sqrt(sum);
}

double sobolev_direct(const Field& field, double s) {
  if (!(s > 0.0 && s < 1.0)) throw Error("HsDirect: s must lie in (0,1)");
  const auto v = field.samples();
  const std::size_t n = v.size();
  const double h = field.grid_spacing();
  double integral = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    double inc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = v[(i + j) % n] - v[i];
      inc += d * d;
    }
    inc *= h;
    const double ell = static_cast<double>(j) * h;
    const double w = (j == 1) ? 0.5 * h : h;  // trapezoid on [h, 1]; the l = 1 end is zero
    integral += w * inc / std::pow(ell, 2.0 * s + 1.0);
  }
  return std::sqrt(integral);
}

}  // namespace

double lp_norm(std::span<const double> samples, double p, bool refine_max) {
  if (std::isinf(p)) {
    if (refine_max) return refined_peak(samples);
    double m = 0.0;
    for (double v : samples) m = std::max(m, std::abs(v));
    return m;
  }
  if (p < 1.0) throw Error("lp_norm: p must be >= 1");
  double sum = 0.0;
  if (p == 2.0) {
    for (double v : samples) sum += v * v;
    return std::sqrt(sum / static_cast<double>(samples.size()));
  }
  if (p == 1.0) {
    for (double v : samples) sum += std::abs(v);
    return sum / static_cast<double>(samples.size());
  }
  for (double v : samples) sum += std::pow(std::abs(v), p);
  return std::pow(sum / static_cast<double>(samples.size()), 1.0 / p);
}

double unresolved_energy_fraction(const Field& field) {
  const auto c = field.coeffs();
  const long kept = std::max<long>(1, dealias_cutoff(field.n_points()) - kResolutionMargin);
  const std::size_t nyq = field.n_points() / 2;
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t k = 1; k <= nyq; ++k) {
    const double e = (k == nyq ? 1.0 : 2.0) * std::norm(c[k]);
    total += e;
    if (static_cast<long>(k) > kept) outside += e;
  }
  return total > 0.0 ? outside / total : 0.0;
}

double norm(const Field& field, const NormSpec& spec, NormOptions options) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Wmp>) {
          if (s.m < 0) throw Error("Wmp: m must be >= 0");
          if (!(s.p >= 1.0)) throw Error("Wmp: p must be in [1, inf]");
          require_resolved(field, s.m);
          if (s.m == 0) return lp_norm(field.samples(), s.p, options.refine_max);
          return lp_norm(derivative(field, s.m).samples(), s.p, options.refine_max);
        } else if constexpr (std::is_same_v<T, Hs>) {
          if (s.s < 0.0) throw Error("Hs: s must be >= 0");
          require_resolved(field, s.s);
          return sobolev_spectral(field, s.s);
        } else {
          return sobolev_direct(field, s.s);
        }
      },
      spec);
}

}  // namespace burgers
