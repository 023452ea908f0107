#pragma once

// Discrete fractional-order predator-prey-parasite map.
//
// Susceptible prey X grows logistically and is infected at rate lambda*X*Y,
// infected prey Y is consumed by the predator Z through a Holling type II
// response.  The map advances every population by rho times its Caputo
// right-hand side, rho = s^alpha / (alpha * Gamma(alpha)).

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracppp/errors.hpp"
#include "fracppp/gamma.hpp"

namespace fracppp {

/// The eight ecological rates and scales; all strictly positive.
struct ModelParams {
  double r = 0.0;       ///< intrinsic prey growth rate (per day)
  double K = 0.0;       ///< carrying capacity
  double lambda = 0.0;  ///< force of infection
  double m = 0.0;       ///< maximum predator attack rate
  double mu = 0.0;      ///< infected-prey total death rate
  double a = 0.0;       ///< half-saturation constant
  double theta = 0.0;   ///< predator reproductive gain (only theta > 0 is required)
  double d = 0.0;       ///< predator death rate

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void validate(const ModelParams& p) {
  const std::array<std::pair<std::string_view, double>, 8> fields{{{"r", p.r},
                                                                   {"K", p.K},
                                                                   {"lambda", p.lambda},
                                                                   {"m", p.m},
                                                                   {"mu", p.mu},
                                                                   {"a", p.a},
                                                                   {"theta", p.theta},
                                                                   {"d", p.d}}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw DomainError("model parameter '" + std::string(name) +
                        "' must be finite and strictly positive");
    }
  }
}

/// alpha * Gamma(alpha), the denominator shared by rho and every step-size threshold.
inline double alpha_gamma(double alpha) { return alpha * gamma_fn(alpha); }

/// Fractional order and step size, with the map coefficient rho cached.
class Discretization {
public:
  Discretization(double alpha, double s) : alpha_(alpha), s_(s) {
    if (!(alpha > 0.0) || alpha > 1.0) {
      throw DomainError("fractional order alpha must lie in (0, 1]");
    }
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DomainError("step size s must be finite and positive");
    }
    rho_ = std::pow(s, alpha) / alpha_gamma(alpha);
  }

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double s() const noexcept { return s_; }
  [[nodiscard]] double rho() const noexcept { return rho_; }

private:
  double alpha_;
  double s_;
  double rho_;
};

struct State {
  double x = 0.0;  ///< susceptible prey
  double y = 0.0;  ///< infected prey
  double z = 0.0;  ///< predator

  friend bool operator==(const State&, const State&) = default;

  [[nodiscard]] bool finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  [[nodiscard]] double max_abs() const noexcept {
    return std::max({std::abs(x), std::abs(y), std::abs(z)});
  }
};

/// Relative infinity-norm distance ||u - v|| / (1 + ||v||).
inline double relative_distance(const State& u, const State& v) noexcept {
  const double diff = std::max({std::abs(u.x - v.x), std::abs(u.y - v.y), std::abs(u.z - v.z)});
  return diff / (1.0 + v.max_abs());
}

/// Per-capita growth rates (right-hand side divided by the population).
inline State per_capita_rates(const ModelParams& p, const State& st) noexcept {
  const double uptake = 1.0 / (p.a + st.y);
  return {p.r * (1.0 - (st.x + st.y) / p.K) - p.lambda * st.y,
          p.lambda * st.x - p.m * st.z * uptake - p.mu,
          p.theta * st.y * uptake - p.d};
}

/// One iteration of the map.  Negative or huge components are returned unchanged;
/// divergence is the caller's concern.
inline State step(const ModelParams& p, const Discretization& dsc, const State& st) noexcept {
  const double rho = dsc.rho();
  const State g = per_capita_rates(p, st);
  return {st.x + rho * st.x * g.x, st.y + rho * st.y * g.y, st.z + rho * st.z * g.z};
}

inline double basic_reproduction_number(const ModelParams& p) noexcept {
  return p.lambda * p.K / p.mu;
}

/// Minimum predator gain for coexistence; empty when the infection cannot invade (R0 <= 1).
inline std::optional<double> theta_threshold(const ModelParams& p) {
  const double excess = p.lambda * p.K - p.mu;
  if (!(excess > 0.0)) {
    return std::nullopt;
  }
  return p.d + p.lambda * p.a * p.d * (p.r + p.lambda * p.K) / (p.r * excess);
}

enum class FixedPointKind { Trivial, Axial, Planar, Interior };

inline std::string_view label(FixedPointKind kind) noexcept {
  switch (kind) {
    case FixedPointKind::Trivial: return "E0";
    case FixedPointKind::Axial: return "E1";
    case FixedPointKind::Planar: return "E2";
    case FixedPointKind::Interior: return "E*";
  }
  return "?";
}

inline std::optional<FixedPointKind> parse_fixed_point_kind(std::string_view text) noexcept {
  for (auto kind : {FixedPointKind::Trivial, FixedPointKind::Axial, FixedPointKind::Planar,
                    FixedPointKind::Interior}) {
    if (label(kind) == text) {
      return kind;
    }
  }
  if (text == "Estar" || text == "E_star") {
    return FixedPointKind::Interior;
  }
  return std::nullopt;
}

struct FixedPoint {
  FixedPointKind kind = FixedPointKind::Trivial;
  State coords;
  bool exists = false;
  std::string existence_note;  ///< empty when the point exists
};

/// Interior equilibrium coordinates from the equilibrium relations, without existence checks.
/// Requires theta != d.
inline State interior_coordinates(const ModelParams& p) noexcept {
  const double y = p.a * p.d / (p.theta - p.d);
  const double x = p.K - (1.0 + p.lambda * p.K / p.r) * y;
  const double z = (p.a + y) * (p.lambda * x - p.mu) / p.m;
  return {x, y, z};
}

/// All four equilibria in the order E0, E1, E2, E*.  Non-existence is reported, not thrown.
inline std::vector<FixedPoint> fixed_points(const ModelParams& p) {
  validate(p);
  std::vector<FixedPoint> out;
  out.reserve(4);
  out.push_back({FixedPointKind::Trivial, {0.0, 0.0, 0.0}, true, {}});
  out.push_back({FixedPointKind::Axial, {p.K, 0.0, 0.0}, true, {}});

  const double r0 = basic_reproduction_number(p);
  const double lk = p.lambda * p.K;
  FixedPoint planar{FixedPointKind::Planar,
                    {p.mu / p.lambda, p.r * (lk - p.mu) / (p.lambda * (p.r + lk)), 0.0},
                    r0 > 1.0,
                    {}};
  if (!planar.exists) {
    planar.existence_note = "requires R0 > 1";
  }
  out.push_back(planar);

  FixedPoint interior{FixedPointKind::Interior, {}, false, {}};
  const auto theta1 = theta_threshold(p);
  if (!(r0 > 1.0)) {
    interior.existence_note = "requires R0 > 1";
  } else if (!(p.theta > p.d)) {
    interior.existence_note = "requires theta > d";
  } else if (!(p.theta > *theta1)) {
    interior.existence_note = "requires theta > theta1";
  } else {
    interior.exists = true;
  }
  if (p.theta != p.d) {
    interior.coords = interior_coordinates(p);
  }
  out.push_back(interior);
  return out;
}

inline FixedPoint fixed_point(const ModelParams& p, FixedPointKind kind) {
  return fixed_points(p).at(static_cast<std::size_t>(kind));
}

}  // namespace fracppp
