#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace fracppp {

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Eigenvalues3 = std::array<std::complex<double>, 3>;

/// Monic cubic xi^3 + c2 xi^2 + c1 xi + c0.
struct MonicCubic {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  [[nodiscard]] std::complex<double> operator()(std::complex<double> xi) const noexcept {
    return ((xi + c2) * xi + c1) * xi + c0;
  }
  [[nodiscard]] std::complex<double> derivative(std::complex<double> xi) const noexcept {
    return (3.0 * xi + 2.0 * c2) * xi + c1;
  }
};

/// Characteristic polynomial det(xi I - M): c2 = -tr M, c1 = sum of principal 2x2 minors, c0 = -det M.
inline MonicCubic characteristic_polynomial(const Matrix3& m) noexcept {
  const double tr = m[0][0] + m[1][1] + m[2][2];
  const double minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) +
                        (m[0][0] * m[2][2] - m[0][2] * m[2][0]) +
                        (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return {-tr, minors, -det};
}

namespace detail {

// Newton refinement that only keeps iterates which reduce the residual.
inline std::complex<double> polish_root(const MonicCubic& p, std::complex<double> xi) noexcept {
  double best = std::abs(p(xi));
  for (int iter = 0; iter < 4 && best > 0.0; ++iter) {
    const auto slope = p.derivative(xi);
    if (slope == std::complex<double>{}) {
      break;
    }
    const auto next = xi - p(xi) / slope;
    const double res = std::abs(p(next));
    if (!(res < best)) {
      break;
    }
    xi = next;
    best = res;
  }
  return xi;
}

}  // namespace detail

/// Deterministic order: descending modulus, ties by descending real then imaginary part.
inline void sort_eigenvalues(Eigenvalues3& ev) noexcept {
  std::sort(ev.begin(), ev.end(), [](const auto& u, const auto& v) {
    const double mu = std::abs(u);
    const double mv = std::abs(v);
    if (mu != mv) return mu > mv;
    if (u.real() != v.real()) return u.real() > v.real();
    return u.imag() > v.imag();
  });
}

/// Roots of a monic cubic with real coefficients by the closed-form (Cardano / trigonometric)
/// solution, each refined by a guarded Newton step.  Complex roots come as an exact conjugate pair.
inline Eigenvalues3 cubic_roots(const MonicCubic& poly) noexcept {
  using cd = std::complex<double>;
  const double shift = poly.c2 / 3.0;
  // depressed cubic t^3 + p t + q with xi = t - shift
  const double p = poly.c1 - poly.c2 * shift;
  const double q = (2.0 * shift * shift - poly.c1) * shift + poly.c0;
  const double half_q = q / 2.0;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;

  Eigenvalues3 roots;
  if (disc > 0.0) {
    // one real root and a conjugate pair; sign choice avoids cancellation
    const double big = -std::copysign(std::cbrt(std::abs(half_q) + std::sqrt(disc)), half_q);
    const double small = big != 0.0 ? -third_p / big : 0.0;
    const double re = -(big + small) / 2.0 - shift;
    const double im = std::numbers::sqrt3 / 2.0 * std::abs(big - small);
    const cd real_root = detail::polish_root(poly, cd{big + small - shift, 0.0});
    cd upper = detail::polish_root(poly, cd{re, im});
    roots = {cd{real_root.real(), 0.0}, upper, std::conj(upper)};
  } else if (p == 0.0) {
    roots = {cd{-shift}, cd{-shift}, cd{-shift}};
  } else {
    const double amp = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(3.0 * q / (p * amp), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double t = amp * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
      roots[static_cast<std::size_t>(k)] =
          cd{detail::polish_root(poly, cd{t - shift, 0.0}).real(), 0.0};
    }
  }
  sort_eigenvalues(roots);
  return roots;
}

/// Eigenvalues of a real 3x3 matrix.  The matrix is shifted by tr/3 first so that clustered
/// spectra near a common value (the map Jacobian tends to I as rho -> 0) keep full accuracy.
inline Eigenvalues3 eigenvalues_3x3(const Matrix3& m) noexcept {
  const double centre = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
  Matrix3 shifted = m;
  for (std::size_t i = 0; i < 3; ++i) {
    shifted[i][i] -= centre;
  }
  Eigenvalues3 ev = cubic_roots(characteristic_polynomial(shifted));
  for (auto& x : ev) {
    x += centre;
  }
  sort_eigenvalues(ev);
  return ev;
}

inline double spectral_radius(const Eigenvalues3& ev) noexcept {
  return std::max({std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2])});
}

}  // namespace fracppp
