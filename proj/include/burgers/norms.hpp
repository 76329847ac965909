#pragma once

#include <limits>
#include <variant>

#include "burgers/field.hpp"

namespace burgers {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Homogeneous Sobolev norm |v|_{m,p}: the L_p norm of the m-th derivative.
struct Wmp {
  int m = 0;
  double p = 2.0;  // [1, inf]
};

/// Spectral H^s norm (2 pi)^s (sum |k|^{2s} |v^k|^2)^{1/2}.
struct Hs {
  double s = 0.0;
};

/// Increment form of the H^s norm for s in (0,1): the double integral of
/// |v(x+l)-v(x)|^2 / l^{2s+1}, discretised over grid shifts l = j/N.
struct HsDirect {
  double s = 0.5;
};

using NormSpec = std::variant<Wmp, Hs, HsDirect>;

struct NormOptions {
  /// Refine p = inf maxima by a parabola through the three grid values around
  /// the discrete maximum.
  bool refine_max = false;
};

double norm(const Field& field, const NormSpec& spec, NormOptions options = {});

/// Fraction of energy carried outside the resolved band (|k| > N/3 - 8).
/// Norms of derivative order >= 3 refuse fields where this exceeds 1e-4.
double unresolved_energy_fraction(const Field& field);

/// L_p norm of grid samples (trapezoid rule, which is the rectangle rule on a
/// periodic grid); p = inf gives the grid maximum.
double lp_norm(std::span<const double> samples, double p, bool refine_max = false);

}  // namespace burgers
