#pragma once

// Quadratic pencil P₂(λ) = A + λB + λ²C on mean-zero trigonometric
// coefficients, with A = −∂(Π₀L₂Π₀)∂, B = −2c∂, C = I, its companion pair
// (L, J), the kernel-projected spectrum with Krein signatures, and the 1×1
// Krein matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbstab/errors.hpp"
#include "gbstab/hill.hpp"
#include "gbstab/profile.hpp"
#include "gbstab/spectral.hpp"
#include "gbstab/tolerances.hpp"

namespace gbstab {

using Complex = std::complex<double>;

struct PencilDiscretization {
  PeriodicWave wave;
  TrigBasis basis;
  double c = 0.0;
  Matrix A, B, C;
  Vector kerA_vector;  ///< unit coefficients of U − Ū; empty for a constant wave
  Matrix Lmat, Jmat;
  Matrix projector;  ///< onto the complement of (a,0) and J⁻¹(a,0); empty without kernel
  double kernel_residual = 0.0;  ///< ‖A a‖
  double hypothesis_i = 0.0;     ///< ⟨a, B a⟩
  Tolerances tol;

  int size() const { return static_cast<int>(A.rows()); }
  bool has_kernel() const { return kerA_vector.size() > 0; }
  /// k̃² per basis column; the diagonal scaling of the balanced companion pair.
  Vector sigma() const { return basis.wavenumber.array().square(); }
};

struct ImaginaryMode {
  Complex lambda;
  int multiplicity = 1;
  int negative = 0;             ///< negative directions of the Krein form on the cluster
  double krein_value = 0.0;     ///< smallest-magnitude eigenvalue of the cluster form
  int krein_sign = 0;           ///< sign for a simple eigenvalue, else sign of the trace
};

struct SpectrumReport {
  std::vector<Complex> eigenvalues;
  ComplexMatrix vectors;  ///< unit pencil eigenvectors (trigonometric coefficients), by column
  std::vector<double> kernel_overlap;  ///< |⟨a, u⟩| per eigenvalue
  int k_r = 0;
  int k_c = 0;
  int k_i_minus = 0;
  int zero_modes = 0;  ///< eigenvalues with |λ| below the kernel threshold
  std::vector<ImaginaryMode> imaginary_modes;
  double re_tol = 0.0;
  double im_tol = 0.0;
  double radius = 0.0;  ///< ‖spectrum‖∞
  double pairing_error = 0.0;  ///< relative to the radius
  double min_magnitude = 0.0;

  int index() const { return k_r + k_c + k_i_minus; }

  /// Eigenvalue with the largest real part.
  std::size_t leading() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
      if (eigenvalues[i].real() > eigenvalues[best].real()) best = i;
    }
    return best;
  }
};

/// Orthogonal projector onto the complement of the two kernel directions.
inline Matrix build_projector(const PencilDiscretization& disc) {
  if (!disc.has_kernel()) throw KernelStructureError("pencil has no kernel direction to project");
  const int n = disc.size();
  const Vector& a = disc.kerA_vector;
  Matrix span = Matrix::Zero(2 * n, 2);
  span.col(0).head(n) = a;
  span.col(1).head(n) = -disc.B * a;
  span.col(1).tail(n) = a;
  Eigen::HouseholderQR<Matrix> qr(span);
  const double r0 = std::abs(qr.matrixQR()(0, 0));
  const double r1 = std::abs(qr.matrixQR()(1, 1));
  if (r1 <= 1e-12 * r0) throw KernelStructureError("kernel directions are linearly dependent");
  const Matrix q = qr.householderQ() * Matrix::Identity(2 * n, 2);
  Matrix proj = Matrix::Identity(2 * n, 2 * n) - q * q.transpose();
  proj = 0.5 * (proj + proj.transpose()).eval();
  const long rank = std::lround(proj.trace());
  if (rank != 2 * n - 2) {
    throw KernelStructureError("projector rank " + std::to_string(rank) + " != " +
                               std::to_string(2 * n - 2));
  }
  return proj;
}

inline PencilDiscretization assemble_pencil(const PeriodicWave& wave, const HillOperator& hill,
                                            const Tolerances& tol = {}) {
  if (hill.wave.N != wave.N || hill.wave.L != wave.L) {
    throw InvalidArgument("Hill operator was built from a different wave");
  }
  PencilDiscretization disc;
  disc.wave = wave;
  disc.tol = tol;
  disc.c = wave.params.c();
  disc.basis = trig_basis(wave.N, wave.L);
  const Matrix& q = disc.basis.columns;
  const int n = disc.basis.size();
  const Matrix d = disc.basis.derivative();

  Matrix m = q.transpose() * hill.matrix * q;
  m = 0.5 * (m + m.transpose()).eval();
  disc.A = -d * m * d;
  disc.A = 0.5 * (disc.A + disc.A.transpose()).eval();
  disc.B = -2.0 * disc.c * d;
  disc.B = 0.5 * (disc.B - disc.B.transpose()).eval();
  disc.C = Matrix::Identity(n, n);

  disc.Lmat = Matrix::Zero(2 * n, 2 * n);
  disc.Lmat.topLeftCorner(n, n) = disc.A;
  disc.Lmat.bottomRightCorner(n, n) = Matrix::Identity(n, n);
  disc.Jmat = Matrix::Zero(2 * n, 2 * n);
  disc.Jmat.topRightCorner(n, n) = Matrix::Identity(n, n);
  disc.Jmat.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  disc.Jmat.bottomRightCorner(n, n) = -disc.B;

  if (!wave.constant) {
    Vector a = disc.basis.coefficients(wave.samples.array() - wave.Umean);
    // coefficients at the rounding floor are noise that A amplifies by k̃⁴
    const double floor = 1e-13 * a.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      if (std::abs(a[k]) < floor) a[k] = 0.0;
    }
    const double norm = a.norm();
    if (norm == 0.0) throw DegenerateOrbitError("profile has no mean-zero part");
    a /= norm;
    disc.kerA_vector = a;
    disc.kernel_residual = (disc.A * a).norm();
    disc.hypothesis_i = a.dot(disc.B * a);
    disc.projector = build_projector(disc);
  }
  return disc;
}

namespace detail {

struct BalancedPair {
  Matrix L;     ///< diag(Σ⁻¹AΣ⁻¹, I)
  Matrix J;     ///< [[0, Σ], [−Σ, −B]]
  Matrix Jinv;  ///< [[−Σ⁻¹BΣ⁻¹, −Σ⁻¹], [Σ⁻¹, 0]]
};

// With w = diag(Σ⁻¹, I)w′ the companion problem JLw = λw becomes J′L′w′ = λw′,
// whose blocks are all of unit order for every Fourier mode.
inline BalancedPair balanced_pair(const PencilDiscretization& disc) {
  const int n = disc.size();
  const Vector s = disc.sigma();
  const Vector sinv = s.cwiseInverse();
  BalancedPair bp;
  bp.L = Matrix::Zero(2 * n, 2 * n);
  bp.L.topLeftCorner(n, n) = sinv.asDiagonal() * disc.A * sinv.asDiagonal();
  bp.L.bottomRightCorner(n, n) = Matrix::Identity(n, n);
  bp.J = Matrix::Zero(2 * n, 2 * n);
  bp.J.topRightCorner(n, n) = s.asDiagonal();
  bp.J.bottomLeftCorner(n, n) = -Matrix(s.asDiagonal());
  bp.J.bottomRightCorner(n, n) = -disc.B;
  bp.Jinv = Matrix::Zero(2 * n, 2 * n);
  bp.Jinv.topLeftCorner(n, n) = -(sinv.asDiagonal() * disc.B * sinv.asDiagonal());
  bp.Jinv.topRightCorner(n, n) = -Matrix(sinv.asDiagonal());
  bp.Jinv.bottomLeftCorner(n, n) = sinv.asDiagonal();
  return bp;
}

}  // namespace detail

/// Eigenvalues of the unprojected companion problem (balanced form).
inline std::vector<Complex> companion_eigenvalues(const PencilDiscretization& disc) {
  const auto bp = detail::balanced_pair(disc);
  Eigen::EigenSolver<Matrix> es(bp.J * bp.L, false);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("companion eigensolver failed");
  std::vector<Complex> out(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

/// Number of companion eigenvalues with |λ| below the kernel threshold.
inline int companion_zero_count(const PencilDiscretization& disc) {
  int count = 0;
  for (const Complex& z : companion_eigenvalues(disc)) {
    if (std::abs(z) < disc.tol.kernel_eigen_abs) ++count;
  }
  return count;
}

/// ⟨u, (−λ)(B + 2λC)u⟩, real for λ ∈ iℝ.
inline Complex krein_quantity(const PencilDiscretization& disc, const ComplexVector& u,
                              Complex lambda) {
  const ComplexVector bu = disc.B.cast<Complex>() * u;
  return -lambda * (u.dot(bu) + 2.0 * lambda * u.squaredNorm());
}

inline SpectrumReport pencil_spectrum(const PencilDiscretization& disc) {
  const int n = disc.size();
  const auto bp = detail::balanced_pair(disc);
  const Vector s = disc.sigma();

  std::vector<Complex> values;
  ComplexMatrix vectors;
  if (disc.has_kernel()) {
    const Vector& a = disc.kerA_vector;
    Vector g0 = Vector::Zero(2 * n);
    g0.head(n) = s.asDiagonal() * a;
    Vector h0 = Vector::Zero(2 * n);
    h0.head(n) = -(s.cwiseInverse().asDiagonal() * (disc.B * a));
    h0.tail(n) = a;
    Matrix span(2 * n, 2);
    span << g0, h0;
    const Matrix z = orthogonal_complement(span);
    const Matrix lr = z.transpose() * bp.L * z;
    const Matrix kinv = z.transpose() * bp.Jinv * z;
    Eigen::PartialPivLU<Matrix> lu(kinv);
    if (lu.rcond() < 1e-14) throw LinearAlgebraError("reduced symplectic form is singular");
    const Matrix reduced = lu.solve(lr);
    Eigen::EigenSolver<Matrix> es(reduced);
    if (es.info() != Eigen::Success) throw LinearAlgebraError("pencil eigensolver failed");
    const int m = static_cast<int>(reduced.rows());
    const ComplexMatrix zc = z.cast<Complex>();
    const ComplexMatrix jl = (bp.J * bp.L).cast<Complex>();
    const double g0sq = g0.squaredNorm();
    vectors.resize(n, m);
    for (int k = 0; k < m; ++k) {
      const Complex lambda = es.eigenvalues()[k];
      ComplexVector w = zc * es.eigenvectors().col(k);
      const Complex alpha = g0.cast<Complex>().dot(jl * w) / (lambda * g0sq);
      w += alpha * g0.cast<Complex>();
      values.push_back(lambda);
      vectors.col(k) = s.cwiseInverse().cast<Complex>().asDiagonal() * w.head(n);
    }
  } else {
    Eigen::EigenSolver<Matrix> es(bp.J * bp.L);
    if (es.info() != Eigen::Success) throw LinearAlgebraError("pencil eigensolver failed");
    vectors.resize(n, 2 * n);
    for (int k = 0; k < 2 * n; ++k) {
      values.push_back(es.eigenvalues()[k]);
      vectors.col(k) = s.cwiseInverse().cast<Complex>().asDiagonal() *
                       es.eigenvectors().col(k).head(n);
    }
  }
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const double norm = vectors.col(k).norm();
    if (norm > 0.0) vectors.col(k) /= norm;
  }

  // canonical order: by imaginary part, then real part
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (values[i].imag() != values[j].imag()) return values[i].imag() < values[j].imag();
    return values[i].real() < values[j].real();
  });

  SpectrumReport rep;
  rep.vectors.resize(n, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    rep.eigenvalues.push_back(values[order[i]]);
    rep.vectors.col(static_cast<Eigen::Index>(i)) = vectors.col(static_cast<Eigen::Index>(order[i]));
  }
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    rep.kernel_overlap.push_back(
        disc.has_kernel()
            ? std::abs(disc.kerA_vector.cast<Complex>().dot(rep.vectors.col(static_cast<Eigen::Index>(i))))
            : 0.0);
  }

  rep.radius = 0.0;
  rep.min_magnitude = std::numeric_limits<double>::infinity();
  for (const Complex& z : rep.eigenvalues) {
    rep.radius = std::max(rep.radius, std::abs(z));
    rep.min_magnitude = std::min(rep.min_magnitude, std::abs(z));
  }
  rep.re_tol = disc.tol.re_rel * rep.radius;
  rep.im_tol = disc.tol.im_rel * rep.radius;
  const double cluster_tol = disc.tol.cluster_rel * rep.radius;

  double pairing = 0.0;
  for (const Complex& z : rep.eigenvalues) {
    double best_neg = std::numeric_limits<double>::infinity();
    double best_conj = std::numeric_limits<double>::infinity();
    for (const Complex& w : rep.eigenvalues) {
      best_neg = std::min(best_neg, std::abs(w + z));
      best_conj = std::min(best_conj, std::abs(w - std::conj(z)));
    }
    pairing = std::max({pairing, best_neg, best_conj});
  }
  rep.pairing_error = rep.radius > 0.0 ? pairing / rep.radius : pairing;

  std::vector<std::size_t> imaginary;
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    const Complex z = rep.eigenvalues[i];
    if (std::abs(z) < disc.tol.kernel_eigen_abs) {
      ++rep.zero_modes;
    } else if (std::abs(z.real()) <= rep.re_tol) {
      imaginary.push_back(i);
    } else if (z.real() > 0.0) {
      if (std::abs(z.imag()) <= rep.im_tol) {
        ++rep.k_r;
      } else {
        ++rep.k_c;
      }
    }
  }

  // cluster imaginary eigenvalues (already ordered by imaginary part)
  std::size_t start = 0;
  while (start < imaginary.size()) {
    std::size_t end = start + 1;
    while (end < imaginary.size() &&
           std::abs(rep.eigenvalues[imaginary[end]] - rep.eigenvalues[imaginary[end - 1]]) <
               cluster_tol) {
      ++end;
    }
    const int mult = static_cast<int>(end - start);
    double mu = 0.0;
    for (std::size_t k = start; k < end; ++k) mu += rep.eigenvalues[imaginary[k]].imag();
    const Complex lambda(0.0, mu / mult);
    ComplexMatrix cluster(n, mult);
    for (int k = 0; k < mult; ++k) {
      cluster.col(k) = rep.vectors.col(static_cast<Eigen::Index>(imaginary[start + k]));
    }
    ImaginaryMode mode;
    mode.lambda = lambda;
    mode.multiplicity = mult;
    ComplexMatrix basis = cluster;
    if (mult > 1) {
      Eigen::HouseholderQR<ComplexMatrix> qr(cluster);
      const auto& r = qr.matrixQR();
      for (int k = 0; k < mult; ++k) {
        if (std::abs(r(k, k)) < 1e-8 * std::abs(r(0, 0))) {
          throw IndeterminateKreinError("eigenvector cluster at lambda = " +
                                        std::to_string(lambda.imag()) +
                                        "i is defective (nearly dependent eigenvectors)");
        }
      }
      basis = qr.householderQ() * ComplexMatrix::Identity(n, mult);
    }
    const ComplexMatrix form = -lambda * (disc.B.cast<Complex>() + 2.0 * lambda * ComplexMatrix::Identity(n, n));
    ComplexMatrix gram = basis.adjoint() * form * basis;
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> ge(gram, Eigen::EigenvaluesOnly);
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < mult; ++k) {
      const double v = ge.eigenvalues()[k];
      if (std::abs(v) < std::abs(smallest)) smallest = v;
      if (v < 0.0) ++mode.negative;
    }
    mode.krein_value = smallest;
    if (std::abs(smallest) < disc.tol.sign_tol) {
      throw IndeterminateKreinError("Krein quantity " + std::to_string(smallest) + " at lambda = " +
                                    std::to_string(lambda.imag()) + "i is below sign_tol");
    }
    const double trace = gram.trace().real();
    mode.krein_sign = mult == 1 ? (smallest > 0.0 ? 1 : -1) : (trace > 0.0 ? 1 : -1);
    rep.k_i_minus += mode.negative;
    rep.imaginary_modes.push_back(mode);
    start = end;
  }
  return rep;
}

/// ⟨a, (I − BA⁻¹B)a⟩ with A⁻¹ the inverse on the complement of ker A.
inline double pencil_scalar(const PencilDiscretization& disc) {
  if (!disc.has_kernel()) throw KernelStructureError("constant wave has no kernel direction");
  const int n = disc.size();
  const Vector& a = disc.kerA_vector;
  Matrix bordered = Matrix::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = disc.A;
  bordered.block(0, n, n, 1) = a;
  bordered.block(n, 0, 1, n) = a.transpose();
  Vector rhs = Vector::Zero(n + 1);
  rhs.head(n) = disc.B * a;
  Eigen::PartialPivLU<Matrix> lu(bordered);
  if (lu.rcond() < 1e-15) throw LinearAlgebraError("bordered kernel system is singular");
  const Vector x = lu.solve(rhs);
  return a.squaredNorm() - a.dot(disc.B * x.head(n));
}

/// Schur complement of P₂(λ) onto the kernel direction a:
/// aᵀPa − aᵀPY (YᵀPY)⁻¹ YᵀPa, with Y an orthonormal basis of a^⊥.
inline Complex krein_matrix_eval(const PencilDiscretization& disc, Complex lambda) {
  if (!disc.has_kernel()) throw KernelStructureError("constant wave has no kernel direction");
  const int n = disc.size();
  const Vector& a = disc.kerA_vector;
  const Matrix y = orthogonal_complement(a);
  const ComplexMatrix pm = disc.A.cast<Complex>() + lambda * disc.B.cast<Complex>() +
                           lambda * lambda * ComplexMatrix::Identity(n, n);
  const ComplexVector pa = pm * a.cast<Complex>();
  const ComplexMatrix yc = y.cast<Complex>();
  const ComplexMatrix inner = yc.transpose() * pm * yc;
  Eigen::PartialPivLU<ComplexMatrix> lu(inner);
  if (lu.rcond() < 1e-14) throw PoleError("Krein matrix has a pole near this lambda", lambda);
  const ComplexVector rhs = yc.transpose() * pa;
  const ComplexVector row = (a.cast<Complex>().transpose() * pm * yc).transpose();
  const ComplexVector sol = lu.solve(rhs);
  return a.cast<Complex>().dot(pa) - (row.array() * sol.array()).sum();
}

struct KreinZero {
  double mu = 0.0;  ///< zero at λ = iμ
  double value = 0.0;
};

/// Imaginary eigenvalues iμ of the pencil compressed to a^⊥; these are the
/// poles of the Krein matrix on iℝ.
inline std::vector<double> krein_poles(const PencilDiscretization& disc) {
  if (!disc.has_kernel()) throw KernelStructureError("constant wave has no kernel direction");
  const Matrix y = orthogonal_complement(disc.kerA_vector);
  const int m = static_cast<int>(y.cols());
  Matrix comp = Matrix::Zero(2 * m, 2 * m);
  comp.topRightCorner(m, m) = Matrix::Identity(m, m);
  comp.bottomLeftCorner(m, m) = -(y.transpose() * disc.A * y);
  comp.bottomRightCorner(m, m) = -(y.transpose() * disc.B * y);
  Eigen::EigenSolver<Matrix> es(comp, false);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("compressed pencil eigensolver failed");
  double radius = 0.0;
  for (int k = 0; k < 2 * m; ++k) radius = std::max(radius, std::abs(es.eigenvalues()[k]));
  std::vector<double> poles;
  for (int k = 0; k < 2 * m; ++k) {
    const Complex z = es.eigenvalues()[k];
    if (std::abs(z.real()) <= disc.tol.re_rel * radius) poles.push_back(z.imag());
  }
  std::sort(poles.begin(), poles.end());
  return poles;
}

/// Sign-change zeros of the real function μ ↦ K(iμ) on [mu_lo, mu_hi]. The
/// segment is cut at the poles and at the origin (where K vanishes because
/// Aa = 0); each piece is sampled geometrically toward its ends and uniformly
/// inside, and brackets are refined by bisection.
inline std::vector<KreinZero> krein_zeros(const PencilDiscretization& disc, double mu_lo,
                                          double mu_hi, int samples_per_piece = 64) {
  if (!(mu_lo < mu_hi)) throw InvalidArgument("empty Krein segment");
  auto k = [&](double mu) { return krein_matrix_eval(disc, Complex(0.0, mu)).real(); };
  std::vector<double> cuts{mu_lo, mu_hi};
  for (double pole : krein_poles(disc)) {
    if (pole > mu_lo && pole < mu_hi) cuts.push_back(pole);
  }
  if (mu_lo < 0.0 && mu_hi > 0.0) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());

  std::vector<KreinZero> zeros;
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const double lo = cuts[piece], hi = cuts[piece + 1];
    const double width = hi - lo;
    if (width <= 0.0) continue;
    const bool lo_open = piece > 0 || lo == 0.0;
    const bool hi_open = piece + 2 < cuts.size() || hi == 0.0;
    std::vector<double> pts;
    // the origin is approached no closer than the zero-eigenvalue threshold
    const double floor_lo = lo == 0.0 ? disc.tol.kernel_eigen_abs : 0.0;
    const double floor_hi = hi == 0.0 ? disc.tol.kernel_eigen_abs : 0.0;
    for (double f = 1e-12; f < 0.02; f *= 10.0) {
      if (lo_open && f * width > floor_lo) pts.push_back(lo + f * width);
      if (hi_open && f * width > floor_hi) pts.push_back(hi - f * width);
    }
    if (lo_open && floor_lo > 0.0 && floor_lo < width) pts.push_back(lo + floor_lo);
    if (hi_open && floor_hi > 0.0 && floor_hi < width) pts.push_back(hi - floor_hi);
    if (!lo_open) pts.push_back(lo);
    if (!hi_open) pts.push_back(hi);
    for (int i = 1; i < samples_per_piece; ++i) pts.push_back(lo + width * i / samples_per_piece);
    std::sort(pts.begin(), pts.end());

    std::optional<double> prev_mu;
    double prev = 0.0;
    for (double mu : pts) {
      double val;
      try {
        val = k(mu);
      } catch (const PoleError&) {
        prev_mu.reset();
        continue;
      }
      if (prev_mu && (val < 0.0) != (prev < 0.0)) {
        double a = *prev_mu, b = mu, fa = prev;
        bool pole = false;
        for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() *
                                                   std::max(1.0, std::abs(b));
             ++it) {
          const double mid = 0.5 * (a + b);
          double fm;
          try {
            fm = k(mid);
          } catch (const PoleError&) {
            pole = true;
            break;
          }
          if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        if (!pole) zeros.push_back({0.5 * (a + b), k(0.5 * (a + b))});
      }
      prev_mu = mu;
      prev = val;
    }
  }
  return zeros;
}

}  // namespace gbstab
