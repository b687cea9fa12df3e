#pragma once

// Fourier-collocation truncation of L₂ = −∂ₓ² + ĉ − f′(U) and the scalars
// ⟨L₂⁻¹1,1⟩, ⟨L₂⁻¹U,U⟩, ⟨L₂⁻¹U,1⟩ built from it.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbstab/errors.hpp"
#include "gbstab/profile.hpp"
#include "gbstab/spectral.hpp"
#include "gbstab/tolerances.hpp"

namespace gbstab {

struct HillOperator {
  PeriodicWave wave;
  Matrix matrix;
  Vector eigenvalues;  ///< ascending
  Matrix eigenvectors;
  std::optional<Vector> kernel_vector;  ///< unit ∂ξU; empty for a constant wave
  int nL2 = 0;
  int zero_count = 0;  ///< eigenvalues inside [−kernel_tol, kernel_tol]
  double kernel_tol = 0.0;
  double kernel_residual = 0.0;  ///< ‖L₂∂ξU‖/‖∂ξU‖
  Tolerances tol;

  int size() const { return static_cast<int>(matrix.rows()); }
};

struct GkdvScalars {
  double s1 = 0.0;
  double sUU = 0.0;
  double sU1 = 0.0;
  double Dgkdv = 0.0;
};

/// f′(u) = (p+1)u^p for f(u) = u^{p+1}.
inline double nonlinearity_slope(double u, double p) {
  return (p + 1.0) * detail::power(u, p);
}

inline HillOperator assemble_hill(const PeriodicWave& wave, const Tolerances& tol = {}) {
  require_even_grid(wave.N);
  HillOperator op;
  op.wave = wave;
  op.tol = tol;
  const int n = wave.N;
  const double p = wave.params.p;
  op.matrix = -second_derivative_matrix(n, wave.L);
  for (int j = 0; j < n; ++j) {
    op.matrix(j, j) += wave.params.chat - nonlinearity_slope(wave.samples[j], p);
  }
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(op.matrix);
  if (eig.info() != Eigen::Success) throw LinearAlgebraError("Hill eigensolver did not converge");
  op.eigenvalues = eig.eigenvalues();
  op.eigenvectors = eig.eigenvectors();

  op.kernel_tol = tol.kernel_rel * op.eigenvalues.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (op.eigenvalues[i] < -op.kernel_tol) {
      ++op.nL2;
    } else if (op.eigenvalues[i] <= op.kernel_tol) {
      ++op.zero_count;
    }
  }

  if (!wave.constant) {
    Vector du = spectral_derivative(wave.samples, wave.L);
    const double norm = du.norm();
    if (norm == 0.0) throw DegenerateOrbitError("profile derivative vanishes identically");
    du /= norm;
    op.kernel_residual = (op.matrix * du).norm();
    op.kernel_vector = du;
  }
  return op;
}

namespace detail {

/// Indices of eigenvalues treated as zero modes and deflated in solves.
inline std::vector<int> deflated_modes(const HillOperator& op) {
  std::vector<int> band;
  for (int i = 0; i < op.size(); ++i) {
    if (std::abs(op.eigenvalues[i]) <= op.kernel_tol) band.push_back(i);
  }
  if (op.kernel_vector) {
    if (band.size() > 1) {
      throw DegenerateKernelError("L2 has " + std::to_string(band.size()) +
                                  " eigenvalues in the zero band; expected only the translation mode");
    }
    if (band.empty()) {
      throw AccuracyError("translation mode is not resolved as a zero eigenvalue; increase N",
                          op.kernel_residual);
    }
  }
  return band;
}

}  // namespace detail

/// The solution of L₂w = rhs orthogonal to the kernel.
inline Vector solve_modulo_kernel(const HillOperator& op, const Vector& rhs) {
  if (rhs.size() != op.size()) throw InvalidArgument("right-hand side has the wrong length");
  const double rnorm = rhs.norm();
  const auto band = detail::deflated_modes(op);
  if (op.kernel_vector && std::abs(op.kernel_vector->dot(rhs)) > op.tol.solvability * rnorm) {
    throw SolvabilityError("right-hand side is not orthogonal to the kernel of L2");
  }
  if (!op.kernel_vector) {
    for (int i : band) {
      if (std::abs(op.eigenvectors.col(i).dot(rhs)) > op.tol.solvability * rnorm) {
        throw SolvabilityError("right-hand side excites a zero mode of L2");
      }
    }
  }
  const Vector coeff = op.eigenvectors.transpose() * rhs;
  Vector scaled = Vector::Zero(op.size());
  for (int i = 0; i < op.size(); ++i) {
    if (std::find(band.begin(), band.end(), i) != band.end()) continue;
    scaled[i] = coeff[i] / op.eigenvalues[i];
  }
  Vector w = op.eigenvectors * scaled;
  if (op.kernel_vector) w -= *op.kernel_vector * op.kernel_vector->dot(w);
  for (int i : band) w -= op.eigenvectors.col(i) * op.eigenvectors.col(i).dot(w);

  const double residual = (op.matrix * w - rhs).norm();
  if (residual > 1e-8 * std::max(1.0, rnorm)) {
    throw AccuracyError("Hill solve residual " + std::to_string(residual) + " too large", residual);
  }
  return w;
}

inline GkdvScalars gkdv_scalars(const HillOperator& op) {
  const Vector ones = Vector::Ones(op.size());
  const Vector& u = op.wave.samples;
  const double L = op.wave.L;
  const Vector w1 = solve_modulo_kernel(op, ones);
  const Vector wu = solve_modulo_kernel(op, u);
  GkdvScalars s;
  s.s1 = grid_inner(w1, ones, L);
  s.sUU = grid_inner(wu, u, L);
  s.sU1 = grid_inner(wu, ones, L);
  if (std::abs(s.s1) <= op.tol.s1_floor) {
    throw NearDegenerateError("<L2^-1 1, 1> = " + std::to_string(s.s1) +
                              " is too close to zero to classify");
  }
  s.Dgkdv = (s.sUU * s.s1 - s.sU1 * s.sU1) / s.s1;
  return s;
}

/// Negative count of the scalar ⟨L₂⁻¹1,1⟩ (0 or 1).
inline int negative_count(double value) { return value < 0.0 ? 1 : 0; }

/// n(Π₀L₂Π₀) from the eigenvalues of L₂ compressed to the mean-zero subspace.
inline int projected_negative_count(const HillOperator& op) {
  const Matrix q = orthogonal_complement(Vector::Ones(op.size()));
  Matrix m = q.transpose() * op.matrix * q;
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw LinearAlgebraError("projected eigensolver failed");
  int count = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] < -op.kernel_tol) ++count;
  }
  return count;
}

}  // namespace gbstab
