#pragma once

// Closed-form instability index from Hill-operator data, the critical
// wavespeed, and the cross-check against the directly computed pencil spectrum.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "gbstab/errors.hpp"
#include "gbstab/hill.hpp"
#include "gbstab/pencil.hpp"
#include "gbstab/profile.hpp"
#include "gbstab/tolerances.hpp"

namespace gbstab {

struct IndexReport {
  int nL2 = 0;
  int n_s1 = 0;
  int nD = 0;
  int n_scalar = 0;
  int count = 0;       ///< nL2 − n_s1 − n_scalar
  int gkdv_count = 0;  ///< nL2 − n_s1 − nD
  double s1 = 0.0;
  double sUU = 0.0;
  double sU1 = 0.0;
  double Dgkdv = 0.0;
  double mean_free_norm2 = 0.0;  ///< ⟨U−Ū, U−Ū⟩
  double scalar = 0.0;           ///< ⟨U−Ū, U−Ū⟩ + 4(1−ĉ)D
  std::optional<double> chat_star;
  bool constant = false;
};

inline double mean_free_norm2(const PeriodicWave& wave) {
  const Vector d = wave.samples.array() - wave.Umean;
  return grid_inner(d, d, wave.L);
}

/// ĉ* = 1 + ⟨U−Ū,U−Ū⟩/(4D), defined only when D < 0.
inline std::optional<double> critical_speed(const PeriodicWave& wave, const HillOperator& hill) {
  if (wave.constant) return std::nullopt;
  const auto s = gkdv_scalars(hill);
  if (!(s.Dgkdv < 0.0)) return std::nullopt;
  return 1.0 + mean_free_norm2(wave) / (4.0 * s.Dgkdv);
}

inline IndexReport index_from_formula(const PeriodicWave& wave, const HillOperator& hill) {
  const auto s = gkdv_scalars(hill);
  IndexReport r;
  r.constant = wave.constant;
  r.nL2 = hill.nL2;
  r.s1 = s.s1;
  r.sUU = s.sUU;
  r.sU1 = s.sU1;
  r.Dgkdv = s.Dgkdv;
  r.n_s1 = negative_count(s.s1);
  r.mean_free_norm2 = mean_free_norm2(wave);
  const double c2 = 1.0 - wave.params.chat;
  if (wave.constant) {
    // U ∝ 1 makes the determinant vanish identically and ker A is trivial
    r.nD = 0;
    r.scalar = 0.0;
    r.n_scalar = 0;
  } else {
    r.nD = negative_count(s.Dgkdv);
    r.scalar = r.mean_free_norm2 + 4.0 * c2 * s.Dgkdv;
    r.n_scalar = negative_count(r.scalar);
    if (s.Dgkdv < 0.0) r.chat_star = 1.0 + r.mean_free_norm2 / (4.0 * s.Dgkdv);
  }
  r.count = r.nL2 - r.n_s1 - r.n_scalar;
  r.gkdv_count = r.nL2 - r.n_s1 - r.nD;
  return r;
}

struct IndexVerdict {
  IndexReport formula;
  int k_r = 0;
  int k_c = 0;
  int k_i_minus = 0;
  int direct = 0;
  bool equal = false;
  double pencil_scalar = 0.0;    ///< ⟨a,(C − BA⁻¹B)a⟩ with ‖a‖ = 1
  double reconcile_error = 0.0;  ///< relative gap between the two scalars
  bool reconciled = true;
  double hypothesis_i = 0.0;
  bool hypothesis_i_ok = true;
  bool hypothesis_ii_ok = true;
  int projected_negative = 0;  ///< n(Π₀L₂Π₀) by direct eigencount
  bool ok() const { return equal && reconciled && hypothesis_i_ok && hypothesis_ii_ok; }
};

inline IndexVerdict verify_index(const PeriodicWave& wave, const HillOperator& hill,
                                 const PencilDiscretization& disc, const SpectrumReport& spectrum) {
  IndexVerdict v;
  v.formula = index_from_formula(wave, hill);
  v.k_r = spectrum.k_r;
  v.k_c = spectrum.k_c;
  v.k_i_minus = spectrum.k_i_minus;
  v.direct = spectrum.index();
  v.equal = v.direct == v.formula.count;
  v.projected_negative = projected_negative_count(hill);
  if (disc.has_kernel()) {
    v.hypothesis_i = disc.hypothesis_i;
    const double bscale = std::max(1.0, disc.B.cwiseAbs().maxCoeff());
    v.hypothesis_i_ok = std::abs(disc.hypothesis_i) <= 1e-12 * bscale;
    v.pencil_scalar = pencil_scalar(disc);
    v.hypothesis_ii_ok = std::abs(v.pencil_scalar) > disc.tol.sign_tol;
    const double lifted = v.pencil_scalar * v.formula.mean_free_norm2;
    const double scale = std::max(std::abs(v.formula.scalar), v.formula.mean_free_norm2);
    v.reconcile_error = std::abs(lifted - v.formula.scalar) / scale;
    v.reconciled = v.reconcile_error <= disc.tol.reconcile_rel;
  }
  return v;
}

/// Everything computed for one wave.
struct WaveAnalysis {
  PeriodicWave wave;
  HillOperator hill;
  PencilDiscretization pencil;
  SpectrumReport spectrum;
  IndexVerdict verdict;
};

inline WaveAnalysis analyze_wave(const WaveParameters& params, int N, const Tolerances& tol = {}) {
  WaveAnalysis out;
  out.wave = sample_profile(params, N, tol);
  out.hill = assemble_hill(out.wave, tol);
  out.pencil = assemble_pencil(out.wave, out.hill, tol);
  out.spectrum = pencil_spectrum(out.pencil);
  out.verdict = verify_index(out.wave, out.hill, out.pencil, out.spectrum);
  return out;
}

struct GeomCheck {
  std::array<std::array<double, 4>, 4> jacobian{};  ///< rows (a, E, c, b), columns (T, M1, P̃, M2)
  double T = 0.0;
  double det2 = 0.0;
  double det4 = 0.0;
  double product = 0.0;       ///< T·det₂·det₄ at step h
  double product_half = 0.0;  ///< same at step h/2
  double direct = 0.0;        ///< ⟨a,(C − BA⁻¹B)a⟩·‖U−Ū‖²
  bool agree = false;         ///< sign(product) == sign(direct)
  /// With M2 = cM1 − bT the expansion of det₄ gives T·det₂·det₄ = −T²det₂²·scalar.
  double predicted = 0.0;
  double identity_error = 0.0;  ///< |product − predicted| / |predicted|
  /// Same product with M2 taken as ∫v = bT − cM1 (v = b − cu on the wave),
  /// which flips the last column of det₄.
  double product_casimir = 0.0;
  bool agree_casimir = false;
};

namespace detail {

inline std::array<double, 4> map_vector(const ConservedMaps& m) { return {m.T, m.M1, m.Ptilde, m.M2}; }

inline double det4(std::array<std::array<double, 4>, 4> m) {
  Eigen::Matrix4d x;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = m[i][j];
  return x.determinant();
}

inline std::array<std::array<double, 4>, 4> jacobian(const std::array<double, 4>& x, double p,
                                                    std::optional<double> hint, double rel,
                                                    const Tolerances& tol) {
  std::array<std::array<double, 4>, 4> jac{};
  for (int i = 0; i < 4; ++i) {
    const double h = rel * std::max(1.0, std::abs(x[i]));
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    std::array<double, 4> fp, fm;
    try {
      fp = map_vector(conserved_maps(xp[0], xp[1], xp[2], xp[3], p, hint, tol));
      fm = map_vector(conserved_maps(xm[0], xm[1], xm[2], xm[3], p, hint, tol));
    } catch (const NonexistenceError& e) {
      throw StencilError(std::string("finite-difference stencil leaves the existence region: ") + e.what());
    } catch (const DegenerateOrbitError& e) {
      throw StencilError(std::string("finite-difference stencil meets a degenerate orbit: ") + e.what());
    }
    for (int j = 0; j < 4; ++j) jac[i][j] = (fp[j] - fm[j]) / (2.0 * h);
  }
  return jac;
}

inline double geom_product(const std::array<std::array<double, 4>, 4>& jac, double T,
                           double* det2_out = nullptr, double* det4_out = nullptr) {
  enum { A = 0, E = 1, C = 2, B = 3 };
  const double det2 = jac[A][0] * jac[E][1] - jac[A][1] * jac[E][0];
  const double d4 = det4({jac[E], jac[A], jac[C], jac[B]});
  if (det2_out) *det2_out = det2;
  if (det4_out) *det4_out = d4;
  return T * det2 * d4;
}

}  // namespace detail

/// Sign comparison between T·det₂·det₄ of the conserved-quantity Jacobian and
/// the pencil scalar of the same wave.
inline GeomCheck geom_jacobian_check(const WaveParameters& params, int N = 128,
                                     const Tolerances& tol = {}, double step = 1e-5) {
  params.validate();
  const double c = params.c();
  const std::array<double, 4> x{params.a, params.E, c, params.b};
  GeomCheck g;
  g.T = conserved_maps(x[0], x[1], x[2], x[3], params.p, params.well_hint, tol).T;
  g.jacobian = detail::jacobian(x, params.p, params.well_hint, step, tol);
  g.product = detail::geom_product(g.jacobian, g.T, &g.det2, &g.det4);
  const auto half = detail::jacobian(x, params.p, params.well_hint, 0.5 * step, tol);
  g.product_half = detail::geom_product(half, g.T);
  if ((g.product < 0.0) != (g.product_half < 0.0)) {
    throw StencilError("Jacobian product changes sign when the step is halved");
  }
  const auto wave = sample_profile(params, N, tol);
  const auto hill = assemble_hill(wave, tol);
  const auto disc = assemble_pencil(wave, hill, tol);
  g.direct = pencil_scalar(disc) * mean_free_norm2(wave);
  g.agree = (g.product < 0.0) == (g.direct < 0.0) && g.product != 0.0;
  g.product_casimir = -g.product;
  g.agree_casimir = (g.product_casimir < 0.0) == (g.direct < 0.0) && g.product != 0.0;
  g.predicted = -g.T * g.T * g.det2 * g.det2 * g.direct;
  g.identity_error = std::abs(g.product - g.predicted) / std::abs(g.predicted);
  return g;
}

}  // namespace gbstab
