#pragma once

// Independent reference computations used only by the tests: elliptic-integral
// periods, a direct O(N²) trigonometric derivative, and polynomial roots.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Real roots of x³ + b x² + c x + d in ascending order (three-real-root case).
inline std::array<double, 3> cubic_roots(double b, double c, double d) {
  const double q = (b * b - 3.0 * c) / 9.0;
  const double r = (2.0 * b * b * b - 9.0 * b * c + 27.0 * d) / 54.0;
  const double theta = std::acos(std::clamp(r / std::sqrt(q * q * q), -1.0, 1.0));
  std::array<double, 3> x;
  for (int k = 0; k < 3; ++k) {
    x[k] = -2.0 * std::sqrt(q) * std::cos((theta + 2.0 * std::numbers::pi * k) / 3.0) - b / 3.0;
  }
  std::sort(x.begin(), x.end());
  return x;
}

/// Half-period for U'' = a + ĉU − U², E = −au − ĉu²/2 + u³/3, orbit between
/// the upper two roots of E = V.
inline double half_period_p1(double a, double E, double chat) {
  // u³ − (3ĉ/2)u² − 3a u − 3E = 0
  const auto e = cubic_roots(-1.5 * chat, -3.0 * a, -3.0 * E);
  const double k = std::sqrt((e[2] - e[1]) / (e[2] - e[0]));
  return std::sqrt(1.5) * 2.0 * std::comp_ellint_1(k) / std::sqrt(e[2] - e[0]);
}

/// Turning points (U₋, U₊) of the a = 0, p = 2 well on the right.
inline std::array<double, 2> turning_points_p2(double E, double chat) {
  const double disc = std::sqrt(chat * chat + 4.0 * E);
  return {std::sqrt(chat - disc), std::sqrt(chat + disc)};
}

/// Half-period for U'' = ĉU − U³ with E < 0 (a = 0): √2·K(k)/U₊.
inline double half_period_p2(double E, double chat) {
  const auto [lo, hi] = turning_points_p2(E, chat);
  const double k = std::sqrt((hi * hi - lo * lo) / (hi * hi));
  return std::sqrt(2.0) * std::comp_ellint_1(k) / hi;
}

/// Derivative of order m of grid samples on [−L, L) by a direct DFT sum.
inline Eigen::VectorXd dft_derivative(const Eigen::VectorXd& f, double L, int m) {
  const int n = static_cast<int>(f.size());
  std::vector<std::complex<double>> coef(n);
  for (int k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < n; ++j) {
      s += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / n);
    }
    coef[k] = s / static_cast<double>(n);
  }
  Eigen::VectorXd out(n);
  const double x0 = -L;
  for (int j = 0; j < n; ++j) {
    std::complex<double> s = 0.0;
    const double x = x0 + 2.0 * L * j / n;
    for (int k = 0; k < n; ++k) {
      const int kk = k < n / 2 ? k : k - n;
      if (2 * std::abs(kk) == n) continue;
      const double kt = std::numbers::pi * kk / L;
      // coefficient is relative to the node index, so shift by x0
      s += coef[k] * std::pow(std::complex<double>(0.0, kt), m) *
           std::polar(1.0, kt * (x - x0));
    }
    out[j] = s.real();
  }
  return out;
}

}  // namespace oracle
