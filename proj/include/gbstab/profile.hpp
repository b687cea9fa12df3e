#pragma once

// Periodic traveling-wave profiles of U'' = a + ĉU − U^{p+1} by phase-plane
// quadrature, and the conserved-quantity maps (T, M1, P̃, M2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gbstab/errors.hpp"
#include "gbstab/spectral.hpp"
#include "gbstab/tolerances.hpp"

namespace gbstab {

/// One periodic wave of the profile ODE, identified by (p, a, b, E, ĉ, sign c).
struct WaveParameters {
  double p = 1.0;
  double a = 0.0;
  double b = 0.0;
  double E = -0.1;
  double chat = 0.5;  ///< ĉ = 1 − c²
  int csign = 1;
  /// A point inside the requested potential well, for energies with two wells.
  std::optional<double> well_hint;

  double c() const { return csign * std::sqrt(std::max(0.0, 1.0 - chat)); }
  double effective_a() const { return a + c() * b; }

  void validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("exponent p must be >= 1");
    if (!(chat > 0.0 && chat <= 1.0)) throw InvalidArgument("chat must lie in (0, 1]");
    if (csign != 1 && csign != -1) throw InvalidArgument("csign must be +1 or -1");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(E)) {
      throw InvalidArgument("wave parameters must be finite");
    }
  }
};

struct TurningPoints {
  double lower = 0.0;  ///< U₋
  double upper = 0.0;  ///< U₊
};

struct PeriodicWave {
  WaveParameters params;
  int N = 0;
  double L = 0.0;  ///< half-period
  Vector samples;  ///< U(ξ_j), ξ_j = −L + 2Lj/N, with U(0) = U₋
  double Umean = 0.0;
  double Uminus = 0.0;
  double Uplus = 0.0;
  double residual = 0.0;  ///< max_j |½(∂ξU)² + V(U) − E|
  double quadrature_error = 0.0;
  bool constant = false;  ///< equilibrium state U ≡ const

  Vector nodes() const { return grid_nodes(N, L); }
  double wavespeed() const { return params.c(); }
  double period() const { return 2.0 * L; }
};

struct ConservedMaps {
  double T = 0.0;
  double M1 = 0.0;
  double Ptilde = 0.0;
  double M2 = 0.0;
};

namespace detail {

inline bool is_integer(double p) { return std::floor(p) == p && std::abs(p) < 64.0; }

inline void check_domain(double u, double p) {
  if (u < 0.0 && !is_integer(p)) {
    throw DomainError("non-integer exponent requires u >= 0, got u = " + std::to_string(u));
  }
}

inline double ipow(double u, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= u;
  return r;
}

/// u^m for the nonlinearity; integer exponents stay exact for negative u.
inline double power(double u, double m) {
  if (is_integer(m)) return m >= 0 ? ipow(u, static_cast<int>(m)) : std::pow(u, m);
  return std::pow(u, m);
}

/// (u^m − w^m) / (m (u − w)), continuous across u = w.
inline double power_secant(double u, double w, double m) {
  if (is_integer(m)) {
    const int im = static_cast<int>(m);
    double sum = 0.0;
    double up = 1.0;
    std::vector<double> wp(im, 1.0);
    for (int k = 1; k < im; ++k) wp[k] = wp[k - 1] * w;
    for (int k = 0; k < im; ++k) {
      sum += up * wp[im - 1 - k];
      up *= u;
    }
    return sum / m;
  }
  const double big = std::max(u, w);
  const double small = std::min(u, w);
  if (big == 0.0) return 0.0;
  if (big == small) return std::pow(big, m - 1.0);
  const double t = (small - big) / big;  // in [−1, 0)
  return std::pow(big, m - 1.0) * std::expm1(m * std::log1p(t)) / (m * t);
}

}  // namespace detail

/// V(u) = −a u − ĉu²/2 + u^{p+2}/(p+2), with a replaced by a + c·b.
inline double potential(double u, const WaveParameters& w) {
  detail::check_domain(u, w.p);
  const double m = w.p + 2.0;
  return -w.effective_a() * u - 0.5 * w.chat * u * u + detail::power(u, m) / m;
}

inline double potential_slope(double u, const WaveParameters& w) {
  detail::check_domain(u, w.p);
  return -w.effective_a() - w.chat * u + detail::power(u, w.p + 1.0);
}

inline double potential_curvature(double u, const WaveParameters& w) {
  detail::check_domain(u, w.p);
  return -w.chat + (w.p + 1.0) * detail::power(u, w.p);
}

/// (V(u) − V(w)) / (u − w) without cancellation; equals V'(w) at u = w.
inline double potential_secant(double u, double v, const WaveParameters& w) {
  detail::check_domain(u, w.p);
  detail::check_domain(v, w.p);
  return -w.effective_a() - 0.5 * w.chat * (u + v) + detail::power_secant(u, v, w.p + 2.0);
}

namespace detail {

inline double energy_scale(const WaveParameters& w) { return std::max(1.0, std::abs(w.E)); }

/// Admissible u-range outside of which V is monotone and above E.
inline std::pair<double, double> admissible_range(const WaveParameters& w) {
  const double aa = std::abs(w.effective_a());
  double r = 1.0;
  for (int it = 0; it < 200; ++it) {
    const bool slope_ok = power(r, w.p + 1.0) > w.chat * r + aa + 1.0;
    const bool level_ok =
        power(r, w.p + 2.0) / (w.p + 2.0) > aa * r + 0.5 * w.chat * r * r + std::abs(w.E) + 1.0;
    if (slope_ok && level_ok) break;
    r *= 2.0;
  }
  return {is_integer(w.p) ? -r : 0.0, r};
}

template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct CriticalPoints {
  std::vector<double> minima;
  std::vector<double> maxima;
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

inline CriticalPoints critical_points(const WaveParameters& w, const Tolerances& tol) {
  CriticalPoints cp;
  std::tie(cp.lo, cp.hi) = admissible_range(w);
  const int n = tol.root_scan_points;
  cp.step = (cp.hi - cp.lo) / n;
  auto slope = [&](double u) { return potential_slope(u, w); };
  double prev_u = cp.lo;
  double prev = slope(prev_u);
  for (int i = 1; i <= n; ++i) {
    const double u = cp.lo + cp.step * i;
    const double cur = slope(u);
    std::optional<double> root;
    if (prev == 0.0) {
      root = prev_u;
    } else if ((prev < 0.0) != (cur < 0.0) && cur != 0.0) {
      root = bisect(slope, prev_u, u);
    } else if (cur == 0.0 && i == n) {
      root = u;
    }
    if (root) {
      const double curv = potential_curvature(*root, w);
      if (curv > 0.0) {
        cp.minima.push_back(*root);
      } else if (curv < 0.0) {
        cp.maxima.push_back(*root);
      }
    }
    prev_u = u;
    prev = cur;
  }
  return cp;
}

/// Center of the requested well: the hint, or the rightmost local minimum of V.
inline std::optional<double> select_center(const WaveParameters& w, const CriticalPoints& cp) {
  if (w.well_hint) {
    double best = std::numeric_limits<double>::quiet_NaN();
    double dist = std::numeric_limits<double>::infinity();
    for (double m : cp.minima) {
      if (std::abs(m - *w.well_hint) < dist) {
        dist = std::abs(m - *w.well_hint);
        best = m;
      }
    }
    if (std::isnan(best)) return std::nullopt;
    return best;
  }
  if (cp.minima.empty()) return std::nullopt;
  return *std::max_element(cp.minima.begin(), cp.minima.end());
}

inline double march_to_root(const WaveParameters& w, const CriticalPoints& cp, double start,
                            int direction) {
  auto g = [&](double u) { return potential(u, w) - w.E; };
  double u = start;
  const int limit = 4 * static_cast<int>((cp.hi - cp.lo) / cp.step) + 8;
  for (int i = 0; i < limit; ++i) {
    double next = u + direction * cp.step;
    const bool at_edge = direction > 0 ? next >= cp.hi : next <= cp.lo;
    if (at_edge) next = direction > 0 ? cp.hi : cp.lo;
    if (g(next) >= 0.0) {
      double root = bisect(g, u, next);
      // one Newton polish on the bracketed root
      const double slope = potential_slope(root, w);
      if (slope != 0.0) {
        const double cand = root - g(root) / slope;
        if ((cand - u) * (cand - next) <= 0.0 && std::abs(g(cand)) <= std::abs(g(root))) {
          root = cand;
        }
      }
      return root;
    }
    if (at_edge) {
      throw NonexistenceError("orbit is unbounded: V stays below E up to u = " +
                              std::to_string(next));
    }
    u = next;
  }
  throw NonexistenceError("no turning point found");
}

}  // namespace detail

/// Local minima of V, ascending; each is the center of a potential well.
inline std::vector<double> well_centers(const WaveParameters& w, const Tolerances& tol = {}) {
  w.validate();
  auto minima = detail::critical_points(w, tol).minima;
  std::sort(minima.begin(), minima.end());
  return minima;
}

/// Adjacent simple roots U₋ < U₊ of V(U) = E bracketing the selected well.
inline TurningPoints turning_points(const WaveParameters& w, const Tolerances& tol = {}) {
  w.validate();
  const auto cp = detail::critical_points(w, tol);
  const double scale = detail::energy_scale(w);
  double start = 0.0;
  if (w.well_hint) {
    detail::check_domain(*w.well_hint, w.p);
    if (!(potential(*w.well_hint, w) < w.E)) {
      throw NonexistenceError("well hint " + std::to_string(*w.well_hint) +
                              " is not inside a potential well at this energy");
    }
    start = *w.well_hint;
  } else {
    const auto center = detail::select_center(w, cp);
    if (!center) throw NonexistenceError("potential has no local minimum");
    const double depth = w.E - potential(*center, w);
    if (std::abs(depth) <= 1e-14 * scale) {
      throw DegenerateOrbitError("energy equals the well minimum (equilibrium)");
    }
    if (depth < 0.0) {
      throw NonexistenceError("energy " + std::to_string(w.E) + " lies below the well minimum " +
                              std::to_string(potential(*center, w)));
    }
    start = *center;
  }
  TurningPoints tp;
  tp.lower = detail::march_to_root(w, cp, start, -1);
  tp.upper = detail::march_to_root(w, cp, start, +1);
  if (!(tp.lower < tp.upper)) throw DegenerateOrbitError("turning points coincide");

  const double width = tp.upper - tp.lower;
  for (double m : cp.maxima) {
    if (m > tp.lower && m < tp.upper && w.E - potential(m, w) <= tol.degenerate_orbit * scale) {
      throw DegenerateOrbitError("orbit touches the separatrix through the saddle at u = " +
                                 std::to_string(m));
    }
  }
  for (double r : {tp.lower, tp.upper}) {
    if (std::abs(potential_slope(r, w)) * width < tol.degenerate_orbit * scale) {
      throw DegenerateOrbitError("turning point u = " + std::to_string(r) +
                                 " is a double root (homoclinic or equilibrium limit)");
    }
  }
  return tp;
}

namespace detail {

/// Quadrature in the phase variable θ, U = m − Δ cos θ. The period integrand
/// becomes g(θ) = 1/√(2R) with E − V = (U − U₋)(U₊ − U) R, an even analytic
/// 2π-periodic function, so the trapezoid rule and its cosine series are
/// spectrally accurate.
class PhaseQuadrature {
 public:
  PhaseQuadrature(const WaveParameters& w, TurningPoints tp, const Tolerances& tol)
      : w_(w), tp_(tp), mid_(0.5 * (tp.lower + tp.upper)), half_(0.5 * (tp.upper - tp.lower)) {
    int n = 32;
    double previous = sample(n);
    for (;;) {
      n *= 2;
      const double current = sample(n);
      error_ = std::abs(current - previous);
      if (error_ <= 1e-14 * std::abs(current)) break;
      if (n >= (1 << 17)) {
        if (error_ > tol.quadrature * std::abs(current)) {
          throw AccuracyError("period quadrature did not converge", error_ / std::abs(current));
        }
        break;
      }
      previous = current;
    }
    build_series();
  }

  double half_period() const { return half_period_; }
  double error() const { return error_; }
  int nodes() const { return n_; }

  double profile(double theta) const { return mid_ - half_ * std::cos(theta); }

  /// Integrand dξ/dθ.
  double density(double theta) const {
    const double u = profile(theta);
    double r;
    if (theta <= 0.5 * std::numbers::pi) {
      r = -potential_secant(u, tp_.lower, w_) / (tp_.upper - u);
    } else {
      r = potential_secant(u, tp_.upper, w_) / (u - tp_.lower);
    }
    if (!(r > 0.0)) {
      throw NonexistenceError("potential is not below E inside the turning points");
    }
    return 1.0 / std::sqrt(2.0 * r);
  }

  /// ξ(θ) = ∫₀^θ g.
  double xi(double theta) const {
    double acc = 0.5 * coef_[0] * theta;
    const double c = std::cos(theta);
    double s_prev = 0.0;
    double s_cur = std::sin(theta);
    const std::size_t n = coef_.size();
    for (std::size_t m = 1; m < n; ++m) {
      const double weight = (m + 1 == n) ? 0.5 : 1.0;
      acc += weight * coef_[m] * s_cur / static_cast<double>(m);
      const double s_next = 2.0 * c * s_cur - s_prev;
      s_prev = s_cur;
      s_cur = s_next;
    }
    return acc;
  }

  /// θ with ξ(θ) = x, x ∈ [0, L].
  double theta_at(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= half_period_) return std::numbers::pi;
    double lo = 0.0;
    double hi = std::numbers::pi;
    double theta = std::numbers::pi * x / half_period_;
    for (int it = 0; it < 100; ++it) {
      const double f = xi(theta) - x;
      if (f > 0.0) {
        hi = theta;
      } else {
        lo = theta;
      }
      double next = theta - f / density(theta);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - theta) <= 1e-15 * std::max(1.0, theta)) {
        theta = next;
        break;
      }
      theta = next;
    }
    return theta;
  }

  /// ∫₀^L F(U(ξ)) dξ by the trapezoid rule in θ.
  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (int k = 0; k <= n_; ++k) {
      const double theta = std::numbers::pi * k / n_;
      const double weight = (k == 0 || k == n_) ? 0.5 : 1.0;
      acc += weight * f(profile(theta)) * density_[k];
    }
    return acc * std::numbers::pi / n_;
  }

 private:
  double sample(int n) {
    n_ = n;
    density_.resize(n + 1);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      density_[k] = density(std::numbers::pi * k / n);
      acc += ((k == 0 || k == n) ? 0.5 : 1.0) * density_[k];
    }
    half_period_ = acc * std::numbers::pi / n;
    return half_period_;
  }

  void build_series() {
    // DCT-I through the even extension of length 2n.
    const int n = n_;
    std::vector<std::complex<double>> ext(2 * n), spec;
    for (int k = 0; k <= n; ++k) ext[k] = density_[k];
    for (int k = 1; k < n; ++k) ext[2 * n - k] = density_[k];
    Eigen::FFT<double> fft;
    fft.fwd(spec, ext);
    coef_.resize(n + 1);
    for (int m = 0; m <= n; ++m) coef_[m] = spec[m].real() / n;
    // drop the negligible tail so ξ(θ) stays cheap
    const double cut = 1e-18 * std::abs(coef_[0]);
    std::size_t keep = coef_.size();
    while (keep > 2 && std::abs(coef_[keep - 1]) < cut) --keep;
    if (keep < coef_.size()) coef_.resize(keep + 1, 0.0);
  }

  WaveParameters w_;
  TurningPoints tp_;
  double mid_;
  double half_;
  int n_ = 0;
  double half_period_ = 0.0;
  double error_ = 0.0;
  std::vector<double> density_;
  std::vector<double> coef_;
};

}  // namespace detail

/// L = (1/√2) ∫_{U₋}^{U₊} dU / √(E − V(U)).
inline double half_period(const WaveParameters& w, const Tolerances& tol = {}) {
  const auto tp = turning_points(w, tol);
  return detail::PhaseQuadrature(w, tp, tol).half_period();
}

/// Period of small oscillations about the selected well's center.
inline double equilibrium_half_period(const WaveParameters& w, double center) {
  const double curv = potential_curvature(center, w);
  if (!(curv > 0.0)) throw DegenerateOrbitError("well center is not a strict minimum");
  return std::numbers::pi / std::sqrt(curv);
}

/// Constant state at the selected well's center; the default domain is the
/// small-amplitude limit half-period π/√V''.
inline PeriodicWave equilibrium_wave(WaveParameters w, int N, std::optional<double> L = {},
                                     const Tolerances& tol = {}) {
  w.validate();
  require_even_grid(N);
  const auto cp = detail::critical_points(w, tol);
  const auto center = detail::select_center(w, cp);
  if (!center) throw NonexistenceError("potential has no local minimum");
  w.E = potential(*center, w);
  PeriodicWave wave;
  wave.params = w;
  wave.N = N;
  wave.L = L ? *L : equilibrium_half_period(w, *center);
  if (!(wave.L > 0.0)) throw InvalidArgument("half-period must be positive");
  wave.samples = Vector::Constant(N, *center);
  wave.Umean = wave.Uminus = wave.Uplus = *center;
  wave.residual = 0.0;
  wave.constant = true;
  return wave;
}

/// Grid samples of the wave with U(0) = U₋, ∂ξU(0) = 0, extended evenly to
/// [−L, L). Each sample inverts the quadrature map ξ(U).
inline PeriodicWave sample_profile(const WaveParameters& w, int N, const Tolerances& tol = {}) {
  w.validate();
  if (N < 32 || N % 2 != 0) {
    throw InvalidArgument("grid size must be even and at least 32, got " + std::to_string(N));
  }
  if (!w.well_hint) {
    const auto cp = detail::critical_points(w, tol);
    if (const auto center = detail::select_center(w, cp)) {
      if (std::abs(w.E - potential(*center, w)) <= 1e-14 * detail::energy_scale(w)) {
        return equilibrium_wave(w, N, std::nullopt, tol);
      }
    }
  }
  const auto tp = turning_points(w, tol);
  const detail::PhaseQuadrature quad(w, tp, tol);

  PeriodicWave wave;
  wave.params = w;
  wave.N = N;
  wave.L = quad.half_period();
  wave.quadrature_error = quad.error();
  wave.Uminus = tp.lower;
  wave.Uplus = tp.upper;
  wave.samples.resize(N);
  // ξ_j = −L + 2Lj/N; |ξ_j| = |ξ_{N−j}|, so each value is computed once.
  for (int j = 0; j <= N / 2; ++j) {
    const double x = wave.L * std::abs(1.0 - 2.0 * j / N);
    const double u = quad.profile(quad.theta_at(x));
    wave.samples[j] = u;
    if (j > 0 && j < N / 2) wave.samples[N - j] = u;
  }
  wave.samples[N / 2] = tp.lower;
  wave.samples[0] = tp.upper;
  wave.Umean = wave.samples.mean();

  const Vector du = spectral_derivative(wave.samples, wave.L);
  double residual = 0.0;
  for (int j = 0; j < N; ++j) {
    const double e = 0.5 * du[j] * du[j] + potential(wave.samples[j], w) - w.E;
    residual = std::max(residual, std::abs(e));
  }
  wave.residual = residual;
  if (residual > tol.profile_residual * detail::energy_scale(w)) {
    throw AccuracyError("energy identity residual " + std::to_string(residual) +
                            " exceeds tolerance; increase N",
                        residual);
  }
  return wave;
}

/// (T, M1, P̃, M2) at (a, E, c, b) for f(u) = u^{p+1}. The profile uses the
/// shifted constant a + cb and ĉ = 1 − c².
inline ConservedMaps conserved_maps(double a, double E, double c, double b, double p,
                                    std::optional<double> well_hint = {},
                                    const Tolerances& tol = {}) {
  if (!(std::abs(c) < 1.0)) throw InvalidArgument("wavespeed must satisfy |c| < 1");
  WaveParameters w;
  w.p = p;
  w.a = a + c * b;
  w.b = 0.0;
  w.E = E;
  w.chat = 1.0 - c * c;
  w.csign = c < 0.0 ? -1 : 1;
  w.well_hint = well_hint;
  const auto tp = turning_points(w, tol);
  const detail::PhaseQuadrature quad(w, tp, tol);
  ConservedMaps m;
  m.T = 2.0 * quad.half_period();
  m.M1 = 2.0 * quad.integrate([](double u) { return u; });
  const double mass2 = 2.0 * quad.integrate([](double u) { return u * u; });
  const double P = c * mass2;
  m.Ptilde = -P + b * m.M1;
  m.M2 = c * m.M1 - b * m.T;
  return m;
}

}  // namespace gbstab
