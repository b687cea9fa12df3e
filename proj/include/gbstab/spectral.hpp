#pragma once

// Fourier collocation on the 2L-periodic grid ξ_j = −L + 2Lj/N.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "gbstab/errors.hpp"

namespace gbstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline void require_even_grid(int n, int minimum = 4) {
  if (n < minimum || n % 2 != 0) {
    throw InvalidArgument("grid size must be even and at least " + std::to_string(minimum) +
                          ", got " + std::to_string(n));
  }
}

inline Vector grid_nodes(int n, double half_period) {
  Vector x(n);
  for (int j = 0; j < n; ++j) x[j] = -half_period + 2.0 * half_period * j / n;
  return x;
}

/// Signed integer wavenumber of FFT slot m (Nyquist reported as −N/2).
inline int fft_mode(int m, int n) { return m < n / 2 ? m : m - n; }

/// First-derivative collocation matrix (Nyquist mode annihilated).
inline Matrix differentiation_matrix(int n, double half_period) {
  require_even_grid(n);
  const double h = 2.0 * std::numbers::pi / n;
  const double scale = std::numbers::pi / half_period;
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = scale * 0.5 * sign / std::tan(0.5 * k * h);
    }
  }
  return d;
}

/// Second-derivative collocation matrix with symbol −k̃² on every mode,
/// including the Nyquist mode.
inline Matrix second_derivative_matrix(int n, double half_period) {
  require_even_grid(n);
  const double h = 2.0 * std::numbers::pi / n;
  const double scale = std::numbers::pi / half_period;
  Matrix d2(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d2(i, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
      } else {
        const int k = i - j;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * k * h);
        d2(i, j) = -0.5 * sign / (s * s);
      }
    }
  }
  return d2 * (scale * scale);
}

/// Spectral derivative of periodic samples; odd orders drop the Nyquist mode.
inline Vector spectral_derivative(const Vector& samples, double half_period, int order = 1) {
  const int n = static_cast<int>(samples.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.data(), samples.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const double scale = std::numbers::pi / half_period;
  for (int m = 0; m < n; ++m) {
    const int k = fft_mode(m, n);
    if (order % 2 == 1 && 2 * std::abs(k) == n) {
      spec[m] = 0.0;
      continue;
    }
    spec[m] *= std::pow(std::complex<double>(0.0, scale * k), order);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Vector>(out.data(), n);
}

/// Periodic translation f(x) -> f(x − shift) by Fourier phase rotation.
inline Vector spectral_shift(const Vector& samples, double half_period, double shift) {
  const int n = static_cast<int>(samples.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.data(), samples.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const double scale = std::numbers::pi / half_period;
  for (int m = 0; m < n; ++m) {
    const int k = fft_mode(m, n);
    if (2 * std::abs(k) == n) {
      spec[m] *= std::cos(scale * k * shift);
      continue;
    }
    spec[m] *= std::polar(1.0, -scale * k * shift);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Vector>(out.data(), n);
}

/// Trapezoid inner product on the periodic grid.
inline double grid_inner(const Vector& f, const Vector& g, double half_period) {
  return 2.0 * half_period / static_cast<double>(f.size()) * f.dot(g);
}

inline double grid_norm(const Vector& f, double half_period) {
  return std::sqrt(grid_inner(f, f, half_period));
}

/// Real trigonometric basis of the mean-zero subspace: columns ordered
/// (cos k̃₁x, sin k̃₁x, cos k̃₂x, ...) for k = 1..N/2−1, Euclidean-orthonormal on
/// the grid. The Nyquist cosine is not part of the basis.
struct TrigBasis {
  Matrix columns;     ///< N × (N−2) grid samples
  Vector wavenumber;  ///< k̃ = πk/L for each column
  double half_period = 0.0;

  int size() const { return static_cast<int>(columns.cols()); }

  /// Coefficient-space derivative: d/dx maps cos → −k̃ sin and sin → k̃ cos.
  Matrix derivative() const {
    const int n = size();
    Matrix d = Matrix::Zero(n, n);
    for (int j = 0; j + 1 < n; j += 2) {
      const double k = wavenumber[j];
      d(j + 1, j) = -k;
      d(j, j + 1) = k;
    }
    return d;
  }

  Vector coefficients(const Vector& samples) const { return columns.transpose() * samples; }
  Vector samples(const Vector& coefficients) const { return columns * coefficients; }
};

inline TrigBasis trig_basis(int n, double half_period) {
  require_even_grid(n);
  const Vector x = grid_nodes(n, half_period);
  TrigBasis basis;
  basis.half_period = half_period;
  basis.columns.resize(n, n - 2);
  basis.wavenumber.resize(n - 2);
  const double norm = std::sqrt(2.0 / n);
  for (int k = 1; k < n / 2; ++k) {
    const double kt = std::numbers::pi * k / half_period;
    const int col = 2 * (k - 1);
    for (int j = 0; j < n; ++j) {
      basis.columns(j, col) = norm * std::cos(kt * x[j]);
      basis.columns(j, col + 1) = norm * std::sin(kt * x[j]);
    }
    basis.wavenumber[col] = kt;
    basis.wavenumber[col + 1] = kt;
  }
  return basis;
}

/// Orthonormal basis of the orthogonal complement of span(vectors).
inline Matrix orthogonal_complement(const Matrix& vectors) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index k = vectors.cols();
  if (k == 0) return Matrix::Identity(n, n);
  Eigen::HouseholderQR<Matrix> qr(vectors);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - k);
}

}  // namespace gbstab
