#pragma once

// Local stability of the map's equilibria: Jacobian, eigenvalue classification,
// Jury conditions, and the closed-form step-size thresholds s2..s8 together with
// the numerically located s9.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracppp/cubic.hpp"
#include "fracppp/errors.hpp"
#include "fracppp/model.hpp"

namespace fracppp {

/// Jacobian of the map.  Entries (0,2) and (2,0) are structurally zero.
struct JacobianMatrix {
  Matrix3 entries{};

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
    return entries[i][j];
  }
};

inline JacobianMatrix jacobian(const ModelParams& p, const Discretization& dsc, const State& st) {
  const double denom = p.a + st.y;
  if (denom == 0.0) {
    throw DomainError("jacobian: singular at Y = -a");
  }
  const double rho = dsc.rho();
  const double denom2 = denom * denom;
  JacobianMatrix j;
  auto& e = j.entries;
  e[0][0] = 1.0 + rho * (p.r * (1.0 - (2.0 * st.x + st.y) / p.K) - p.lambda * st.y);
  e[0][1] = -rho * st.x * (p.lambda + p.r / p.K);
  e[0][2] = 0.0;
  e[1][0] = rho * p.lambda * st.y;
  e[1][1] = 1.0 + rho * (p.lambda * st.x - p.m * st.z / denom - p.mu) +
            rho * p.m * st.y * st.z / denom2;
  e[1][2] = -rho * p.m * st.y / denom;
  e[2][0] = 0.0;
  e[2][1] = rho * p.a * p.theta * st.z / denom2;
  e[2][2] = 1.0 + rho * (p.theta * st.y / denom - p.d);
  return j;
}

enum class Classification { Sink, Source, Saddle, NonHyperbolic };

inline std::string_view label(Classification c) noexcept {
  switch (c) {
    case Classification::Sink: return "sink";
    case Classification::Source: return "source";
    case Classification::Saddle: return "saddle";
    case Classification::NonHyperbolic: return "non-hyperbolic";
  }
  return "?";
}

inline constexpr double kUnitCircleTolerance = 1e-10;

inline Classification classify_moduli(const std::array<double, 3>& moduli) noexcept {
  bool all_inside = true;
  bool all_outside = true;
  for (double mod : moduli) {
    if (std::abs(mod - 1.0) < kUnitCircleTolerance) {
      return Classification::NonHyperbolic;
    }
    all_inside = all_inside && mod < 1.0;
    all_outside = all_outside && mod > 1.0;
  }
  if (all_inside) return Classification::Sink;
  if (all_outside) return Classification::Source;
  return Classification::Saddle;
}

/// A named inequality `margin > 0`.
struct JuryCondition {
  std::string name;
  double margin = 0.0;

  [[nodiscard]] bool holds() const noexcept { return margin > 0.0; }
};

/// Jury conditions for xi^3 + A1 xi^2 + A2 xi + A3: all three hold iff every root lies
/// strictly inside the unit circle.
inline std::vector<JuryCondition> jury_conditions(const MonicCubic& poly) {
  const double a1 = poly.c2;
  const double a2 = poly.c1;
  const double a3 = poly.c0;
  return {{"p(1) > 0", 1.0 + a1 + a2 + a3},
          {"-p(-1) > 0", 1.0 - a1 + a2 - a3},
          {"1 - A3^2 > |A2 - A3 A1|", (1.0 - a3 * a3) - std::abs(a2 - a3 * a1)}};
}

/// Two-dimensional conditions for xi^2 + A xi + B.
inline std::vector<JuryCondition> jury_conditions_quadratic(double a, double b) {
  return {{"B < 1", 1.0 - b}, {"1 + B > |A|", 1.0 + b - std::abs(a)}};
}

inline bool all_hold(const std::vector<JuryCondition>& conds) noexcept {
  return std::all_of(conds.begin(), conds.end(), [](const auto& c) { return c.holds(); });
}

/// Closed-form coefficients of the characteristic polynomial at the interior equilibrium.
struct InteriorCoefficients {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  /// p(1) from its factored form rho^3 a d r m X* Z* / (K (a+Y*)^2); always positive.
  double p_at_one = 0.0;

  [[nodiscard]] MonicCubic polynomial() const noexcept { return {a1, a2, a3}; }
};

namespace detail {

inline const FixedPoint& require_interior(const std::vector<FixedPoint>& fps) {
  const auto& fp = fps[static_cast<std::size_t>(FixedPointKind::Interior)];
  if (!fp.exists) {
    throw NotExistingError("interior equilibrium E* does not exist: " + fp.existence_note);
  }
  return fp;
}

// Coefficients in terms of rho alone; the state must be the existing interior point.
inline InteriorCoefficients interior_coeffs_at(const ModelParams& p, const State& e, double rho) {
  const double denom2 = (p.a + e.y) * (p.a + e.y);
  const double u = p.r * e.x / p.K;                     // -(J11 - 1) / rho
  const double v = p.m * e.y * e.z / denom2;            // (J22 - 1) / rho
  const double w = p.a * p.m * p.d * e.z / denom2;      // -J23 J32 / rho^2
  const double c = e.x * e.y * (p.r * p.lambda / p.K + p.lambda * p.lambda);  // -J12 J21 / rho^2
  const double rho2 = rho * rho;
  InteriorCoefficients out;
  out.a1 = rho * u - rho * v - 3.0;
  out.a2 = 3.0 + 2.0 * rho * (v - u) + rho2 * (w - u * v) + rho2 * c;
  out.a3 = -((1.0 - rho * u) * (1.0 + rho * v + rho2 * w) + rho2 * c);
  out.p_at_one = rho2 * rho * u * w;
  return out;
}

}  // namespace detail

inline InteriorCoefficients interior_char_coeffs(const ModelParams& p, const Discretization& dsc) {
  const auto fps = fixed_points(p);
  return detail::interior_coeffs_at(p, detail::require_interior(fps).coords, dsc.rho());
}

/// Third Jury margin (1 - A3^2) - |A2 - A3 A1| at the interior point; s9 is its first zero.
inline double interior_jury_margin(const ModelParams& p, const Discretization& dsc) {
  return jury_conditions(interior_char_coeffs(p, dsc).polynomial())[2].margin;
}

inline constexpr int kS9GridPoints = 1000;
inline constexpr double kS9Tolerance = 1e-6;

/// Smallest positive s in (0, s_max] at which the third interior Jury margin vanishes.
/// Grid scan then bisection.  Empty when the margin stays positive on the whole interval.
inline std::optional<double> find_s9(const ModelParams& p, double alpha, double s_max) {
  const auto fps = fixed_points(p);
  const State e = detail::require_interior(fps).coords;
  if (!(s_max > 0.0)) {
    throw DomainError("find_s9: s_max must be positive");
  }
  const double ag = alpha_gamma(alpha);
  auto margin = [&](double s) {
    const double rho = std::pow(s, alpha) / ag;
    return jury_conditions(detail::interior_coeffs_at(p, e, rho).polynomial())[2].margin;
  };

  // g(0) = 0 exactly, so a non-positive first grid value means the root sits below the
  // first grid cell; rescan that cell a bounded number of times.
  double hi_bound = s_max;
  for (int level = 0; level < 8; ++level) {
    double prev = 0.0;
    bool root_below_grid = false;
    for (int i = 1; i <= kS9GridPoints; ++i) {
      const double s = hi_bound * i / kS9GridPoints;
      if (margin(s) > 0.0) {
        prev = s;
        continue;
      }
      if (i == 1) {
        root_below_grid = true;
        break;
      }
      double lo = prev;
      double hi = s;
      while (hi - lo > kS9Tolerance) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    if (!root_below_grid) {
      return std::nullopt;
    }
    hi_bound /= kS9GridPoints;
  }
  return hi_bound;
}

/// Every threshold of the step-size stability windows for one fractional order.  Undefined entries
/// (applicability condition failed) are empty.
struct ThresholdSet {
  double alpha = 1.0;
  double r0 = 0.0;
  std::optional<double> theta1;
  std::optional<double> d1;
  std::optional<double> s2, s3, s4, s5, s6, s7, s8, s9;
  double s9_search_max = 0.0;  ///< upper end of the s9 scan; s9 > this when s9 is empty
  std::vector<std::string> verdicts;

  /// Upper bound on s for a stable interior equilibrium, min(s8, s9).
  [[nodiscard]] std::optional<double> interior_bound() const {
    if (!s8) return std::nullopt;
    return s9 ? std::min(*s8, *s9) : *s8;
  }
};

namespace detail {

inline std::string fmt4(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

inline std::optional<double> root_alpha(double base, double alpha) {
  if (!(base > 0.0)) return std::nullopt;
  return std::pow(base, 1.0 / alpha);
}

}  // namespace detail

/// Default s9 scan limit, 2 * min(s8, 1).
inline double default_s9_search_max(std::optional<double> s8) {
  return 2.0 * std::min(s8.value_or(1.0), 1.0);
}

inline ThresholdSet thresholds(const ModelParams& p, double alpha,
                               std::optional<double> s9_search_max = std::nullopt) {
  validate(p);
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw DomainError("thresholds: alpha must lie in (0, 1]");
  }
  const double ag = alpha_gamma(alpha);
  const double lk = p.lambda * p.K;
  ThresholdSet t;
  t.alpha = alpha;
  t.r0 = basic_reproduction_number(p);
  t.theta1 = theta_threshold(p);

  t.s2 = detail::root_alpha(2.0 * ag / p.d, alpha);
  t.s3 = detail::root_alpha(2.0 * ag / p.r, alpha);
  if (p.mu > lk) {
    t.s4 = detail::root_alpha(2.0 * ag / (p.mu - lk), alpha);
  }
  if (lk > p.mu) {
    t.d1 = p.theta * p.r * (lk - p.mu) / (p.a * p.lambda * (lk + p.r) + p.r * (lk - p.mu));
    t.s5 = detail::root_alpha(ag / (lk - p.mu), alpha);
    t.s7 = std::pow(lk * ag * ag / (p.mu * p.r * (lk - p.mu)), 1.0 / (2.0 * alpha));
    if (p.d > *t.d1) {
      t.s6 = detail::root_alpha(2.0 * ag / (p.d - *t.d1), alpha);
    }
  }

  const auto fps = fixed_points(p);
  const auto& interior = fps[static_cast<std::size_t>(FixedPointKind::Interior)];
  if (interior.exists) {
    t.s8 = detail::root_alpha(2.0 * p.K * ag / (p.r * interior.coords.x), alpha);
    t.s9_search_max = s9_search_max.value_or(default_s9_search_max(t.s8));
    t.s9 = find_s9(p, alpha, t.s9_search_max);
  }

  using detail::fmt4;
  t.verdicts.emplace_back("E0: unstable for every alpha and s");
  if (t.r0 < 1.0) {
    const double bound = std::min({*t.s2, *t.s3, t.s4.value_or(INFINITY)});
    t.verdicts.emplace_back("E1: stable for s < min(s2, s3, s4) = " + fmt4(bound));
  } else {
    t.verdicts.emplace_back("E1: unstable for every s (R0 >= 1)");
  }
  if (!(t.r0 > 1.0)) {
    t.verdicts.emplace_back("E2: does not exist (R0 <= 1)");
  } else if (t.s6) {
    t.verdicts.emplace_back("E2: stable for s5 < s < min(s6, s7), i.e. " + fmt4(*t.s5) +
                            " < s < " + fmt4(std::min(*t.s6, *t.s7)));
  } else {
    t.verdicts.emplace_back("E2: unstable for every s (d <= d1)");
  }
  if (!interior.exists) {
    t.verdicts.emplace_back("E*: does not exist (" + interior.existence_note + ")");
  } else if (t.s9) {
    t.verdicts.emplace_back("E*: stable for s < min(s8, s9) = " + fmt4(*t.interior_bound()));
  } else {
    t.verdicts.emplace_back("E*: stable for s < s8 = " + fmt4(*t.s8) + " (s9 > " +
                            fmt4(t.s9_search_max) + ")");
  }
  return t;
}

/// Eigenvalue classification of one equilibrium, cross-checked against the Jury test.
struct StabilityReport {
  FixedPointKind kind = FixedPointKind::Trivial;
  State coords;
  double alpha = 1.0;
  double s = 1.0;
  Eigenvalues3 eigenvalues{};
  std::array<double, 3> moduli{};
  Classification classification = Classification::NonHyperbolic;
  /// Jury conditions on the cubic characteristic polynomial (closed form at E*).
  std::vector<JuryCondition> jury;
  /// Whether "all Jury conditions hold" matches "classification is Sink".
  bool jury_agrees = true;
  /// E2 only: two-dimensional Jury conditions on the quadratic factor xi^2 + A xi + B behind the window rule.
  std::vector<JuryCondition> quadratic_factor_jury;
  /// Stability predicted by the threshold windows, when they give one.
  std::optional<bool> theorem_predicts_sink;
  /// True when the threshold-window prediction and the eigenvalues disagree.
  bool theorem_disagrees = false;
};

inline StabilityReport classify(const ModelParams& p, const Discretization& dsc,
                                const FixedPoint& fp) {
  if (!fp.exists) {
    throw NotExistingError(std::string(label(fp.kind)) + " does not exist: " + fp.existence_note);
  }
  StabilityReport rep;
  rep.kind = fp.kind;
  rep.coords = fp.coords;
  rep.alpha = dsc.alpha();
  rep.s = dsc.s();
  const JacobianMatrix jac = jacobian(p, dsc, fp.coords);
  rep.eigenvalues = eigenvalues_3x3(jac.entries);
  for (std::size_t i = 0; i < 3; ++i) {
    rep.moduli[i] = std::abs(rep.eigenvalues[i]);
  }
  rep.classification = classify_moduli(rep.moduli);

  const MonicCubic poly = fp.kind == FixedPointKind::Interior
                              ? detail::interior_coeffs_at(p, fp.coords, dsc.rho()).polynomial()
                              : characteristic_polynomial(jac.entries);
  rep.jury = jury_conditions(poly);
  rep.jury_agrees = all_hold(rep.jury) == (rep.classification == Classification::Sink);

  const double s = dsc.s();
  const double lk = p.lambda * p.K;
  switch (fp.kind) {
    case FixedPointKind::Trivial:
      rep.theorem_predicts_sink = false;
      break;
    case FixedPointKind::Axial: {
      const auto t = thresholds(p, dsc.alpha());
      rep.theorem_predicts_sink =
          t.r0 < 1.0 && s < std::min({*t.s2, *t.s3, t.s4.value_or(INFINITY)});
      break;
    }
    case FixedPointKind::Planar: {
      const double rho = dsc.rho();
      const double quad_a = rho * p.r * p.mu / lk - 1.0;
      const double quad_b = rho * rho * p.r * p.mu * (lk - p.mu) / lk;
      rep.quadratic_factor_jury = jury_conditions_quadratic(quad_a, quad_b);
      const auto t = thresholds(p, dsc.alpha());
      rep.theorem_predicts_sink = t.s6.has_value() && *t.s5 < s && s < std::min(*t.s6, *t.s7);
      break;
    }
    case FixedPointKind::Interior: {
      const auto t = thresholds(p, dsc.alpha());
      rep.theorem_predicts_sink = s < *t.interior_bound();
      break;
    }
  }
  rep.theorem_disagrees = rep.theorem_predicts_sink.has_value() &&
                          *rep.theorem_predicts_sink !=
                              (rep.classification == Classification::Sink);
  return rep;
}

}  // namespace fracppp
