#pragma once

// Lab-frame integration of u_t = ∂ₓv, v_t = ∂ₓ(−∂ₓ²u + u − f(u)) with an
// integrating-factor RK4 scheme in Fourier space, plus growth-rate and
// orbital-distance diagnostics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gbstab/errors.hpp"
#include "gbstab/pencil.hpp"
#include "gbstab/profile.hpp"
#include "gbstab/spectral.hpp"

namespace gbstab {

struct InvariantSample {
  double t = 0.0;
  double H = 0.0;
  double Q = 0.0;
  double M1 = 0.0;
  double M2 = 0.0;
};

struct SimulationState {
  Vector u;
  Vector v;
  double half_period = 0.0;
  double p = 1.0;
  double t = 0.0;
  double dt = 0.0;
  std::vector<InvariantSample> invariants_log;
};

class BoussinesqIntegrator {
 public:
  using Spectrum = std::vector<std::complex<double>>;

  BoussinesqIntegrator(int n, double half_period, double p)
      : n_(n), L_(half_period), p_(p), k_(n), keep_(n) {
    require_even_grid(n);
    const double scale = std::numbers::pi / half_period;
    for (int m = 0; m < n; ++m) {
      const int mode = fft_mode(m, n);
      k_[m] = (2 * std::abs(mode) == n) ? 0.0 : scale * mode;
      keep_[m] = 3 * std::abs(mode) < n;  // 2/3 rule
    }
  }

  int size() const { return n_; }
  double half_period() const { return L_; }

  InvariantSample invariants(const Vector& u, const Vector& v, double t = 0.0) const {
    const Vector ux = spectral_derivative(u, L_);
    InvariantSample s;
    s.t = t;
    double h = 0.0;
    for (int j = 0; j < n_; ++j) {
      h += 0.5 * ux[j] * ux[j] + 0.5 * u[j] * u[j] -
           detail::power(u[j], p_ + 2.0) / (p_ + 2.0) + 0.5 * v[j] * v[j];
    }
    const double w = 2.0 * L_ / n_;
    s.H = w * h;
    s.Q = w * u.dot(v);
    s.M1 = w * u.sum();
    s.M2 = w * v.sum();
    return s;
  }

  /// One integrating-factor RK4 step of size dt.
  void step(SimulationState& st, double dt) const {
    Spectrum u = forward(st.u), v = forward(st.v);
    drop_nyquist(u);
    drop_nyquist(v);
    Spectrum ku1, kv1, ku2, kv2, ku3, kv3, ku4, kv4;
    nonlinear(u, v, ku1, kv1);

    Spectrum tu = u, tv = v;
    axpy(tu, tv, 0.5 * dt, ku1, kv1);
    propagate(tu, tv, 0.5 * dt);
    nonlinear(tu, tv, ku2, kv2);

    tu = u;
    tv = v;
    propagate(tu, tv, 0.5 * dt);
    axpy(tu, tv, 0.5 * dt, ku2, kv2);
    nonlinear(tu, tv, ku3, kv3);

    Spectrum hu = u, hv = v;
    propagate(hu, hv, 0.5 * dt);
    axpy(hu, hv, dt, ku3, kv3);
    propagate(hu, hv, 0.5 * dt);
    nonlinear(hu, hv, ku4, kv4);

    // q_new = E q + dt/6 (E k1 + 2 E½ (k2 + k3) + k4)
    Spectrum ru = u, rv = v;
    axpy(ru, rv, dt / 6.0, ku1, kv1);
    propagate(ru, rv, 0.5 * dt);
    axpy(ru, rv, dt / 3.0, ku2, kv2);
    axpy(ru, rv, dt / 3.0, ku3, kv3);
    propagate(ru, rv, 0.5 * dt);
    axpy(ru, rv, dt / 6.0, ku4, kv4);

    st.u = inverse(ru);
    st.v = inverse(rv);
    st.t += dt;
    st.dt = dt;
    if (!st.u.allFinite() || !st.v.allFinite() ||
        st.u.cwiseAbs().maxCoeff() > 1e100) {
      throw BlowupError("solution left the representable range at t = " + std::to_string(st.t),
                        st.t);
    }
  }

 private:
  Spectrum forward(const Vector& x) const {
    std::vector<double> in(x.data(), x.data() + n_);
    Spectrum out;
    fft_.fwd(out, in);
    return out;
  }

  Vector inverse(const Spectrum& s) const {
    Spectrum copy = s;
    std::vector<double> out;
    fft_.inv(out, copy);
    return Eigen::Map<const Vector>(out.data(), n_);
  }

  void drop_nyquist(Spectrum& s) const { s[n_ / 2] = 0.0; }

  static void axpy(Spectrum& u, Spectrum& v, double a, const Spectrum& du, const Spectrum& dv) {
    for (std::size_t m = 0; m < u.size(); ++m) {
      u[m] += a * du[m];
      v[m] += a * dv[m];
    }
  }

  /// Exact flow of the linear part: per mode exp(tL_k) with L_k = [[0, ik], [ik(k²+1), 0]].
  void propagate(Spectrum& u, Spectrum& v, double t) const {
    const std::complex<double> I(0.0, 1.0);
    for (int m = 0; m < n_; ++m) {
      const double k = k_[m];
      if (k == 0.0) continue;
      const double omega = std::abs(k) * std::sqrt(k * k + 1.0);
      const double cs = std::cos(omega * t);
      const double sn = std::sin(omega * t) / omega;
      const std::complex<double> u0 = u[m], v0 = v[m];
      u[m] = cs * u0 + sn * I * k * v0;
      v[m] = sn * I * k * (k * k + 1.0) * u0 + cs * v0;
    }
  }

  /// Nonlinear part (0, −∂ₓ f(u)) with the 2/3 rule applied to f(u).
  void nonlinear(const Spectrum& u, const Spectrum&, Spectrum& du, Spectrum& dv) const {
    const Vector ug = inverse(u);
    Vector f(n_);
    for (int j = 0; j < n_; ++j) f[j] = detail::power(ug[j], p_ + 1.0);
    Spectrum fh = forward(f);
    du.assign(n_, 0.0);
    dv.assign(n_, 0.0);
    const std::complex<double> I(0.0, 1.0);
    for (int m = 0; m < n_; ++m) {
      if (!keep_[m]) continue;
      dv[m] = -I * k_[m] * fh[m];
    }
  }

  int n_;
  double L_;
  double p_;
  std::vector<double> k_;
  std::vector<bool> keep_;
  mutable Eigen::FFT<double> fft_;
};

/// Advances a copy of the state by one step.
inline SimulationState step(const SimulationState& state, double dt) {
  BoussinesqIntegrator integ(static_cast<int>(state.u.size()), state.half_period, state.p);
  SimulationState next = state;
  integ.step(next, dt);
  return next;
}

/// Largest relative change of (H, Q, M1, M2) along the log.
inline double invariant_drift(const std::vector<InvariantSample>& log) {
  if (log.empty()) return 0.0;
  const InvariantSample& s0 = log.front();
  auto rel = [](double x, double x0) {
    return std::abs(x - x0) / (std::abs(x0) > 1e-8 ? std::abs(x0) : 1.0);
  };
  double drift = 0.0;
  for (const auto& s : log) {
    drift = std::max({drift, rel(s.H, s0.H), rel(s.Q, s0.Q), rel(s.M1, s0.M1), rel(s.M2, s0.M2)});
  }
  return drift;
}

/// Traveling-wave initial data (U, −cU) in the lab frame.
inline SimulationState traveling_state(const PeriodicWave& wave) {
  SimulationState st;
  st.u = wave.samples;
  st.v = -wave.params.c() * wave.samples;
  st.half_period = wave.L;
  st.p = wave.params.p;
  return st;
}

/// ‖(δu, δv)‖ in L² with the reference wave translated by `shift`.
inline double perturbation_norm(const PeriodicWave& wave, const Vector& u, const Vector& v,
                                double shift) {
  const Vector ref = spectral_shift(wave.samples, wave.L, shift);
  const Vector du = u - ref;
  const Vector dv = v + wave.params.c() * ref;
  return std::sqrt(grid_inner(du, du, wave.L) + grid_inner(dv, dv, wave.L));
}

/// inf over translations of the distance to the wave orbit: a coarse scan over
/// grid shifts refined by golden-section search.
inline double orbital_distance(const PeriodicWave& wave, const Vector& u, const Vector& v) {
  const int n = wave.N;
  const double h = 2.0 * wave.L / n;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double d = perturbation_norm(wave, u, v, j * h);
    if (d < best_val) {
      best_val = d;
      best = j;
    }
  }
  double a = (best - 1) * h, b = (best + 1) * h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = perturbation_norm(wave, u, v, x1), f2 = perturbation_norm(wave, u, v, x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = perturbation_norm(wave, u, v, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = perturbation_norm(wave, u, v, x2);
    }
  }
  return std::min({best_val, f1, f2});
}

/// Real perturbation (∂φ, λφ − c∂φ) built from pencil eigenvector `index`,
/// scaled to L² norm `amplitude`.
inline std::pair<Vector, Vector> eigen_perturbation(const PencilDiscretization& disc,
                                                    const SpectrumReport& spec, std::size_t index,
                                                    double amplitude) {
  const Complex lambda = spec.eigenvalues.at(index);
  ComplexVector coef = spec.vectors.col(static_cast<Eigen::Index>(index));
  Eigen::Index big = 0;
  coef.cwiseAbs().maxCoeff(&big);
  coef *= std::polar(1.0, -std::arg(coef[big]));
  const Vector re = coef.real(), im = coef.imag();
  const Matrix d = disc.basis.derivative();
  const Matrix& q = disc.basis.columns;
  // φ = q(re + i im); ∂φ = q d (re + i im)
  const Vector phi_re = q * re, phi_im = q * im;
  const Vector dphi_re = q * (d * re), dphi_im = q * (d * im);
  const double c = disc.c;
  Vector du = dphi_re;
  Vector dv = lambda.real() * phi_re - lambda.imag() * phi_im - c * dphi_re;
  (void)dphi_im;
  const double L = disc.wave.L;
  const double norm = std::sqrt(grid_inner(du, du, L) + grid_inner(dv, dv, L));
  if (norm == 0.0) throw InvalidArgument("eigenvector has a vanishing perturbation");
  du *= amplitude / norm;
  dv *= amplitude / norm;
  return {du, dv};
}

struct GrowthResult {
  double rate = 0.0;
  double predicted = 0.0;  ///< Re λ of the seeding eigenvalue
  double window_start = 0.0;
  double window_end = 0.0;
  int window_samples = 0;
  double invariant_drift = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Seeds the wave with the eigenmode `index` at L² size `amplitude`, integrates
/// to `horizon`, and fits log‖perturbation‖ over the window where it lies in
/// [10·amplitude, 1e−3·‖U‖].
inline GrowthResult growth_rate_experiment(const PeriodicWave& wave,
                                           const PencilDiscretization& disc,
                                           const SpectrumReport& spec, std::size_t index,
                                           double amplitude, double horizon, double dt,
                                           int sample_every = 10) {
  const double unorm = grid_norm(wave.samples, wave.L);
  if (amplitude > 1e-6 * unorm * (1.0 + 1e-12)) {
    throw InvalidArgument("perturbation amplitude must not exceed 1e-6 ||U||");
  }
  const auto [du, dv] = eigen_perturbation(disc, spec, index, amplitude);
  SimulationState st = traveling_state(wave);
  st.u += du;
  st.v += dv;
  const BoussinesqIntegrator integ(wave.N, wave.L, wave.params.p);
  const double c = wave.params.c();

  GrowthResult res;
  res.predicted = spec.eigenvalues[index].real();
  const double lo = 10.0 * amplitude;
  const double hi = 1e-3 * unorm;
  const int steps = static_cast<int>(std::ceil(horizon / dt));
  st.invariants_log.push_back(integ.invariants(st.u, st.v, 0.0));
  res.times.push_back(0.0);
  res.norms.push_back(perturbation_norm(wave, st.u, st.v, 0.0));
  for (int s = 1; s <= steps; ++s) {
    integ.step(st, dt);
    if (s % sample_every == 0 || s == steps) {
      const double nrm = perturbation_norm(wave, st.u, st.v, c * st.t);
      res.times.push_back(st.t);
      res.norms.push_back(nrm);
      if (nrm <= hi) st.invariants_log.push_back(integ.invariants(st.u, st.v, st.t));
      if (nrm > 10.0 * hi) break;
    }
  }
  res.invariant_drift = invariant_drift(st.invariants_log);

  // least-squares slope of log‖δ‖ inside the window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  bool entered = false;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    const double nrm = res.norms[i];
    if (nrm >= lo && nrm <= hi) {
      if (!entered) res.window_start = res.times[i];
      entered = true;
      res.window_end = res.times[i];
      const double y = std::log(nrm);
      sx += res.times[i];
      sy += y;
      sxx += res.times[i] * res.times[i];
      sxy += res.times[i] * y;
      ++count;
    } else if (entered && nrm > hi) {
      break;
    }
  }
  res.window_samples = count;
  if (count < 5) {
    throw InconclusiveError("perturbation never spent enough samples inside the fit window");
  }
  res.rate = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return res;
}

struct BoundedResult {
  double max_ratio = 0.0;  ///< max orbital distance / initial perturbation size
  double invariant_drift = 0.0;
  std::vector<double> times;
  std::vector<double> distances;
};

/// Tracks the orbital distance of a perturbed wave over [0, horizon].
inline BoundedResult bounded_perturbation_run(const PeriodicWave& wave, const Vector& du,
                                              const Vector& dv, double horizon, double dt,
                                              int sample_every = 50) {
  SimulationState st = traveling_state(wave);
  st.u += du;
  st.v += dv;
  const BoussinesqIntegrator integ(wave.N, wave.L, wave.params.p);
  const double initial = std::sqrt(grid_inner(du, du, wave.L) + grid_inner(dv, dv, wave.L));
  BoundedResult res;
  st.invariants_log.push_back(integ.invariants(st.u, st.v, 0.0));
  const int steps = static_cast<int>(std::ceil(horizon / dt));
  for (int s = 1; s <= steps; ++s) {
    integ.step(st, dt);
    if (s % sample_every == 0 || s == steps) {
      const double d = orbital_distance(wave, st.u, st.v);
      res.times.push_back(st.t);
      res.distances.push_back(d);
      res.max_ratio = std::max(res.max_ratio, d / initial);
      st.invariants_log.push_back(integ.invariants(st.u, st.v, st.t));
    }
  }
  res.invariant_drift = invariant_drift(st.invariants_log);
  return res;
}

}  // namespace gbstab
