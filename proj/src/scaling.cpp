#include "burgers/scaling.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "burgers/errors.hpp"

namespace burgers {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

FitReport regress(std::span<const FitPoint> points, bool logs) {
  if (points.size() < 3) throw InsufficientData("fit needs at least 3 points, got " + std::to_string(points.size()));
  const std::size_t n = points.size();
  std::vector<double> x(n), y(n), w(n, 1.0);
  bool weighted = true;
  for (const auto& p : points) weighted = weighted && p.stderr_y > 0.0 && std::isfinite(p.stderr_y);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    if (logs) {
      if (!(p.x > 0.0)) throw NonPositiveValue("power-law fit: predictor " + fmt(p.x) + " is not positive");
      if (!(p.y > 0.0)) throw NonPositiveValue("power-law fit: value " + fmt(p.y) + " is not positive");
      x[i] = std::log(p.x);
      y[i] = std::log(p.y);
      // relative error is the standard error of log y
      if (weighted) w[i] = (p.y / p.stderr_y) * (p.y / p.stderr_y);
    } else {
      x[i] = p.x;
      y[i] = p.y;
      if (weighted) w[i] = 1.0 / (p.stderr_y * p.stderr_y);
    }
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    syy += w[i] * (y[i] - ym) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw InsufficientData("fit needs at least two distinct predictor values");
  FitReport r;
  r.n_points = n;
  r.exponent = sxy / sxx;
  r.intercept = ym - r.exponent * xm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.intercept - r.exponent * x[i];
    ss_res += w[i] * e * e;
  }
  r.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  const double dof = static_cast<double>(n - 2);
  const double se = std::sqrt(ss_res / dof / sxx);
  const boost::math::students_t dist(dof);
  r.ci_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return r;
}

}  // namespace

FitReport fit_power_law(std::span<const FitPoint> points) { return regress(points, true); }
FitReport fit_linear(std::span<const FitPoint> points) { return regress(points, false); }

double sobolev_dissipation_exponent(int m) { return -(2.0 * m - 1.0); }

double norm_gamma(int m, double p) { return std::max(0.0, m - 1.0 / p); }

double structure_ell_exponent(double p, double alpha, bool dissipation) {
  if (p <= 1.0 || dissipation) return alpha * p;
  return alpha;
}

double structure_nu_exponent(double p, double alpha) { return p <= 1.0 ? 0.0 : -alpha * (p - 1.0); }

double fractional_exponent(double s) { return s > 0.5 ? -(2.0 * s - 1.0) : 0.0; }

std::vector<ScalingTarget> builtin_targets(double K, double nu_lo, double nu_hi) {
  std::vector<ScalingTarget> t;
  auto nu_target = [&](std::string id, std::string observable, std::map<std::string, double> fixed, double predicted,
                       std::string law) {
    ScalingTarget s;
    s.id = std::move(id);
    s.observable = std::move(observable);
    s.fixed = std::move(fixed);
    s.predicted = predicted;
    s.nu_lo = nu_lo;
    s.nu_hi = nu_hi;
    s.K = K;
    s.law = std::move(law);
    return s;
  };
  t.push_back(nu_target("dissipation_h1", obs::kH1, {}, sobolev_dissipation_exponent(1), "{||u||_1^2} ~ nu^-1"));
  t.push_back(nu_target("dissipation_h2", obs::kH2, {}, sobolev_dissipation_exponent(2), "{||u||_2^2} ~ nu^-3"));
  t.push_back(nu_target("level_energy", obs::kEnergy, {}, -norm_gamma(0, 2.0), "{|u|_2^2} ~ 1"));
  t.push_back(nu_target("level_w11", obs::kW11, {}, -norm_gamma(1, 1.0), "{|u|_{1,1}} ~ 1"));
  {
    auto s = nu_target("x_bounded", obs::kX, {}, 0.0, "{X_t} bounded uniformly in nu");
    s.check = Check::BoundedRatio;
    t.push_back(s);
  }
  {
    ScalingTarget s = nu_target("sf_dissipation", obs::kStructure, {{"p", 2.0}, {"alpha", 1.0}},
                                structure_ell_exponent(2.0, 1.0, true), "S_2(l) ~ l^2 in J1");
    s.predictor = Predictor::Ell;
    s.range = FitRange::Dissipation;
    t.push_back(s);
    s.id = "sf_inertial";
    s.predicted = structure_ell_exponent(2.0, 1.0, false);
    s.range = FitRange::Inertial;
    s.law = "S_2(l) ~ l in J2";
    t.push_back(s);
    s.id = "sf_dissipation_nu";
    s.predictor = Predictor::Nu;
    s.range = FitRange::DissipationPoint;
    s.predicted = structure_ell_exponent(2.0, 1.0, true) + structure_nu_exponent(2.0, 1.0);
    s.law = "S_2(C1 nu / 2) ~ nu";
    t.push_back(s);
  }
  {
    ScalingTarget s = nu_target("flatness", "flatness", {}, -1.0, "F(l) ~ l^-1 in J2");
    s.predictor = Predictor::Ell;
    s.range = FitRange::Inertial;
    t.push_back(s);
  }
  {
    ScalingTarget s = nu_target("spectrum", obs::kSpectrum, {{"M", 4.0}}, -2.0, "E(k) ~ k^-2 in the inertial band");
    s.predictor = Predictor::Wavenumber;
    s.range = FitRange::InertialModes;
    t.push_back(s);
    for (double m : {2.0, 8.0}) {
      ScalingTarget v = s;
      v.id = "spectrum_M" + fmt(m, "%g");
      v.fixed = {{"M", m}};
      v.check = Check::SameAs;
      v.reference = "spectrum";
      v.law = "E(k) slope with M = " + fmt(m, "%g") + " matches M = 4";
      t.push_back(v);
    }
  }
  {
    auto s = nu_target("log_law", obs::kHs, {{"s", 0.5}}, 0.0, "{||u||_{1/2}^2} ~ |log nu|");
    s.predictor = Predictor::LogNu;
    s.check = Check::LogLaw;
    t.push_back(s);
  }
  t.push_back(nu_target("fractional_075", obs::kHs, {{"s", 0.75}}, fractional_exponent(0.75),
                        "{||u||_{3/4}^2} ~ nu^-1/2"));
  t.push_back(nu_target("fractional_025", obs::kHs, {{"s", 0.25}}, fractional_exponent(0.25), "{||u||_{1/4}^2} ~ 1"));

  // further norm asymptotics, reported but not gating
  struct NormCase {
    const char* id;
    int m;
    double p;
  };
  for (const auto& c : {NormCase{"norm_linf", 0, kInfinity}, NormCase{"norm_w1inf", 1, kInfinity},
                        NormCase{"norm_w21", 2, 1.0}}) {
    auto s = nu_target(c.id, obs::kNorm, {{"m", static_cast<double>(c.m)}, {"p", c.p}, {"alpha", 1.0}},
                       -norm_gamma(c.m, c.p), "|u|_{m,p} ~ nu^-gamma");
    s.mandatory = false;
    t.push_back(s);
  }
  return t;
}

std::map<std::string, double> default_tolerances() {
  return {
      {"dissipation_h1", 0.15}, {"dissipation_h2", 0.4},   {"level_energy", 0.1},    {"level_w11", 0.1},
      {"x_bounded", 2.0},       {"sf_dissipation", 0.2},   {"sf_inertial", 0.2},     {"sf_dissipation_nu", 0.25},
      {"flatness", 0.3},        {"spectrum", 0.3},         {"spectrum_M2", 0.15},    {"spectrum_M8", 0.15},
      {"log_law", 0.95},        {"fractional_075", 0.15},  {"fractional_025", 0.1},  {"norm_linf", 0.2},
      {"norm_w1inf", 0.3},      {"norm_w21", 0.3},
  };
}

std::vector<ScalingTarget> select_targets(const std::vector<ScalingTarget>& table, std::span<const std::string> names) {
  std::vector<ScalingTarget> out;
  for (const auto& t : table) {
    for (const auto& n : names) {
      if (t.id == n || t.id.rfind(n + "_", 0) == 0) {
        out.push_back(t);
        break;
      }
    }
  }
  for (const auto& n : names) {
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&](const ScalingTarget& t) { return t.id == n || t.id.rfind(n + "_", 0) == 0; });
    if (!known) throw ConfigError("unknown target '" + n + "'");
  }
  return out;
}

namespace {

bool carries(const StatKey& key, const std::map<std::string, double>& fixed) {
  for (const auto& [name, value] : fixed) {
    const auto v = key.param(name);
    if (!v || !(same(*v, value) || *v == value)) return false;
  }
  return true;
}

// Entries of one observable at nu matching the fixed parameters; "flatness"
// is derived from the p = 4 and p = 2 structure functions per l.
std::vector<std::pair<StatKey, Accumulator>> entries(const EnsembleStats& stats, const ScalingTarget& t, double nu) {
  std::vector<std::pair<StatKey, Accumulator>> out;
  if (t.observable != "flatness") {
    for (auto& e : stats.select(t.observable, nu)) {
      if (carries(e.first, t.fixed)) out.push_back(std::move(e));
    }
    return out;
  }
  std::map<double, Accumulator> s2, s4;
  for (const auto& [key, acc] : stats.select(obs::kStructure, nu)) {
    if (key.param("alpha").value_or(0.0) != 1.0) continue;
    const double p = key.param("p").value_or(0.0);
    const double ell = key.param("ell").value_or(0.0);
    if (p == 2.0) s2[ell] = acc;
    if (p == 4.0) s4[ell] = acc;
  }
  for (const auto& [ell, a2] : s2) {
    auto it = s4.find(ell);
    if (it == s4.end()) continue;
    const auto& a4 = it->second;
    const double f = flatness(a4.mean(), a2.mean());
    const double r4 = a4.mean() > 0.0 ? a4.stderr_of_mean() / a4.mean() : 0.0;
    const double r2 = a2.stderr_of_mean() / a2.mean();
    const double se = f * std::sqrt(r4 * r4 + 4.0 * r2 * r2);
    // carried as a single-sample accumulator with the delta-method stderr
    Accumulator acc = Accumulator::from_moments(2, f, 2.0 * se * se);
    out.emplace_back(StatKey{"flatness", nu, {{"ell", ell}}}, acc);
  }
  return out;
}

std::string source_observable(const ScalingTarget& t) { return t.observable == "flatness" ? obs::kStructure : t.observable; }

void require_sweep(const EnsembleStats& stats, const ScalingTarget& t) {
  const auto nus = stats.viscosities(source_observable(t));
  if (nus.size() < 4 || std::log10(nus.back() / nus.front()) < 1.5 - 1e-9) {
    throw InsufficientData(t.id + ": needs at least 4 viscosities spanning 1.5 decades, stats have " +
                           std::to_string(nus.size()) +
                           (nus.empty() ? std::string() : " spanning " + fmt(std::log10(nus.back() / nus.front()), "%.2f") +
                                                              " decades"));
  }
}

FitPoint point(double x, const Accumulator& a, double root) {
  FitPoint p{x, a.mean(), a.stderr_of_mean()};
  if (root != 1.0 && p.y > 0.0) {
    const double v = std::pow(p.y, 1.0 / root);
    p.stderr_y = p.stderr_y * v / (root * p.y);
    p.y = v;
  }
  return p;
}

}  // namespace

TargetResult evaluate_target(const EnsembleStats& stats, const ScalingTarget& t, double tolerance,
                             const TargetResult* reference) {
  TargetResult r;
  r.target = t;
  r.tolerance = tolerance;
  const std::string source = source_observable(t);

  if (t.range == FitRange::NuInterval || t.range == FitRange::DissipationPoint) {
    require_sweep(stats, t);
    for (double nu : stats.viscosities(source)) {
      if (nu < t.nu_lo * (1 - 1e-9) || nu > t.nu_hi * (1 + 1e-9)) continue;
      auto es = entries(stats, t, nu);
      if (t.range == FitRange::DissipationPoint) {
        const double ell = RangeSpec{t.K}.c1() * nu / 2.0;
        std::erase_if(es, [&](const auto& e) { return !same(e.first.param("ell").value_or(-1.0), ell); });
        if (es.empty()) throw InsufficientData(t.id + ": no entry at l = C1 nu / 2 = " + fmt(ell) + " for nu = " + fmt(nu));
      }
      if (es.empty()) continue;
      if (es.size() > 1) throw InsufficientData(t.id + ": parameters do not single out one entry at nu = " + fmt(nu));
      const double x = t.predictor == Predictor::LogNu ? std::abs(std::log(nu)) : nu;
      r.points.push_back(point(x, es.front().second, t.root));
    }
  } else {
    const auto nus = stats.viscosities(source);
    if (nus.empty()) throw InsufficientData(t.id + ": no " + source + " entries");
    const double nu = t.at_nu > 0.0 ? t.at_nu : nus.front();
    const Ranges ranges = classify_ranges(nu, RangeSpec{t.K});
    double lo = 0.0, hi = 0.0;
    if (t.range == FitRange::Dissipation) {
      lo = 0.0;
      hi = ranges.dissipation.hi / 2.0;
    } else {
      lo = 2.0 * ranges.inertial.lo;
      hi = ranges.inertial.hi / 2.0;
      if (!(hi > lo)) {
        lo = ranges.inertial.lo;
        hi = ranges.inertial.hi;
      }
    }
    const char* param = "ell";
    if (t.range == FitRange::InertialModes) {
      param = "k";
      const double klo = 1.0 / hi;
      const double khi = 1.0 / lo;
      lo = klo;
      hi = khi;
    }
    for (const auto& [key, acc] : entries(stats, t, nu)) {
      const double x = key.param(param).value_or(-1.0);
      if (x > lo && x <= hi * (1 + 1e-12)) r.points.push_back(point(x, acc, t.root));
    }
    if (r.points.size() < 6) {
      throw InsufficientData(t.id + ": " + std::to_string(r.points.size()) + " points with " + param + " in (" +
                             fmt(lo) + ", " + fmt(hi) + "] at nu = " + fmt(nu) + ", need 6");
    }
  }
  std::sort(r.points.begin(), r.points.end(), [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });

  std::ostringstream msg;
  switch (t.check) {
    case Check::Exponent:
      r.fit = fit_power_law(r.points);
      r.passed = std::abs(r.fit.exponent - t.predicted) <= tolerance;
      msg << "fitted " << fmt(r.fit.exponent) << " vs " << fmt(t.predicted) << " +- " << fmt(tolerance);
      break;
    case Check::LogLaw:
      r.fit = fit_linear(r.points);
      r.passed = r.fit.exponent > 0.0 && r.fit.r2 >= tolerance;
      msg << "slope " << fmt(r.fit.exponent) << " against |log nu|, r2 " << fmt(r.fit.r2, "%.4f") << " (need > 0 and >= "
          << fmt(tolerance) << ")";
      break;
    case Check::BoundedRatio: {
      r.fit = fit_power_law(r.points);
      double lo = kInfinity, hi = 0.0;
      for (const auto& p : r.points) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
      }
      const double ratio = hi / lo;
      r.passed = ratio < tolerance;
      msg << "max/min " << fmt(ratio) << " (need < " << fmt(tolerance) << ")";
      break;
    }
    case Check::SameAs:
      r.fit = fit_power_law(r.points);
      if (!reference) {
        msg << "reference target " << t.reference << " was not evaluated";
        r.passed = false;
      } else {
        const double shift = r.fit.exponent - reference->fit.exponent;
        r.passed = std::abs(shift) <= tolerance;
        msg << "fitted " << fmt(r.fit.exponent) << ", shift " << fmt(shift) << " from " << t.reference << " (need <= "
            << fmt(tolerance) << ")";
      }
      break;
  }
  r.fit.passed = r.passed;
  r.message = msg.str();
  return r;
}

std::vector<TargetResult> verify_targets(const EnsembleStats& stats, const std::vector<ScalingTarget>& targets,
                                         const std::map<std::string, double>& tolerances) {
  std::vector<TargetResult> out;
  std::size_t evaluated = 0;
  std::string first_error;
  for (const auto& t : targets) {
    auto tol = tolerances.find(t.id);
    if (tol == tolerances.end()) throw ConfigError("no tolerance for target " + t.id);
    const TargetResult* ref = nullptr;
    for (const auto& done : out) {
      if (done.target.id == t.reference && done.fit.n_points > 0) ref = &done;
    }
    try {
      out.push_back(evaluate_target(stats, t, tol->second, ref));
      ++evaluated;
    } catch (const InsufficientData& e) {
      TargetResult r;
      r.target = t;
      r.tolerance = tol->second;
      r.message = std::string("insufficient data: ") + e.what();
      if (first_error.empty()) first_error = e.what();
      out.push_back(std::move(r));
    } catch (const ViscosityTooLarge& e) {
      TargetResult r;
      r.target = t;
      r.tolerance = tol->second;
      r.message = e.what();
      out.push_back(std::move(r));
    }
  }
  if (evaluated == 0 && !targets.empty()) throw InsufficientData("no target could be evaluated: " + first_error);
  return out;
}

namespace {

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string predicted_text(const ScalingTarget& t) {
  switch (t.check) {
    case Check::Exponent:
      return fmt(t.predicted);
    case Check::LogLaw:
      return "slope>0";
    case Check::BoundedRatio:
      return "bounded";
    case Check::SameAs:
      return "=" + t.reference;
  }
  return "";
}

}  // namespace

void write_report(std::ostream& out, std::span<const TargetResult> results) {
  out << "target,predicted,fitted,ci,pass,r2,n_points,mandatory,message\n";
  for (const auto& r : results) {
    const bool fitted = r.fit.n_points > 0;
    out << r.target.id << ',' << predicted_text(r.target) << ',' << (fitted ? fmt(r.fit.exponent) : "") << ','
        << (fitted ? fmt(r.fit.ci_half_width) : "") << ',' << (r.passed ? "pass" : "fail") << ','
        << (fitted ? fmt(r.fit.r2, "%.4f") : "") << ',' << r.fit.n_points << ',' << (r.target.mandatory ? 1 : 0) << ','
        << quoted(r.message) << '\n';
  }
}

void write_curves(std::ostream& out, std::span<const TargetResult> results) {
  out << "target,x,y,stderr\n";
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      out << r.target.id << ',' << fmt(p.x, "%.10g") << ',' << fmt(p.y, "%.10g") << ',' << fmt(p.stderr_y, "%.10g")
          << '\n';
    }
  }
}

}  // namespace burgers
