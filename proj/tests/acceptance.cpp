// Acceptance checks. `acceptance N` runs check N (1..11), prints one line
// "[PASS] N name: detail" or "[FAIL] N name: detail", and exits 0 or 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gbstab/atlas.hpp"
#include "gbstab/evolve.hpp"
#include "gbstab/index.hpp"

using namespace gbstab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

WaveParameters wave(double p, double a, double E, double chat, int csign = 1, double b = 0.0,
                    std::optional<double> hint = {}) {
  WaveParameters w;
  w.p = p;
  w.a = a;
  w.E = E;
  w.chat = chat;
  w.csign = csign;
  w.b = b;
  w.well_hint = hint;
  return w;
}

std::string describe(const WaveParameters& w) {
  std::ostringstream os;
  os << "(p=" << w.p << " a=" << w.a << " E=" << w.E << " chat=" << w.chat;
  if (w.csign < 0) os << " c<0";
  if (w.b != 0.0) os << " b=" << w.b;
  if (w.well_hint) os << " well@" << *w.well_hint;
  os << ")";
  return os.str();
}

// left well of a two-well potential, located from its centers
WaveParameters left_well(WaveParameters w) {
  const auto centers = well_centers(w);
  w.well_hint = centers.front();
  return w;
}

std::vector<WaveParameters> equality_waves() {
  return {
      wave(1.0, 0.0, -0.1, 0.9),
      wave(1.0, 0.0, -0.1, 0.95),
      wave(1.0, 0.0, -0.1, 0.99),
      wave(1.0, 0.02, -0.05, 0.9),
      wave(1.0, -0.02, -0.05, 0.95),
      wave(1.0, 0.0, -0.1, 0.95, -1),
      wave(1.0, 0.0, -0.05, 0.99),
      wave(2.0, 0.05, -0.02, 0.5),
      left_well(wave(2.0, 0.05, -0.02, 0.5)),
      wave(2.0, 0.0, 0.05, 0.5),
      wave(2.0, -0.122, 0.05, 0.5),
      wave(2.0, -0.16, 0.05, 0.5),
      wave(2.0, -0.25, 0.0, 0.5),
      wave(2.0, 0.0, 0.1, 0.9),
      wave(2.0, 0.0, 0.05, 0.5, 1, 0.1),
      wave(4.0, -0.1, -0.02, 0.5),
      left_well(wave(4.0, -0.1, -0.02, 0.5)),
      wave(4.0, -0.5, 0.0, 0.5),
      wave(4.0, -0.46, 0.21, 0.5),
      wave(4.0, -0.385, 0.21, 0.5),
      wave(4.0, 0.0, 0.2, 0.5),
  };
}

double nearest(const std::vector<Complex>& set, Complex z) {
  double best = std::numeric_limits<double>::infinity();
  for (const Complex& e : set) best = std::min(best, std::abs(e - z));
  return best;
}

std::size_t leading_index(const SpectrumReport& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues[i].real() > s.eigenvalues[best].real()) best = i;
  }
  return best;
}

// 1: direct count equals the closed-form count
Outcome index_equality() {
  int equal = 0, total = 0;
  std::ostringstream bad;
  for (const auto& p : equality_waves()) {
    ++total;
    try {
      const auto w = analyze_wave(p, 128);
      if (w.verdict.equal) {
        ++equal;
      } else {
        bad << " " << describe(p) << " formula " << w.verdict.formula.count << " direct " << w.verdict.direct;
      }
    } catch (const Error& e) {
      bad << " " << describe(p) << " " << e.kind() << ": " << e.what();
    }
  }
  std::ostringstream os;
  os << equal << "/" << total << " waves over p in {1,2,4} agree" << bad.str();
  return {equal == total && total >= 20, os.str()};
}

// 2: constant states against the dispersion relation
Outcome constant_state_dispersion() {
  double worst = 0.0;
  bool counts = true;
  std::ostringstream os;
  for (double p : {1.0, 2.0, 4.0}) {
    for (double chat : {0.5, 0.9, 1.0}) {
      const auto eq = equilibrium_wave(wave(p, 0.0, 0.0, chat), 64, 7.0);
      const auto hill = assemble_hill(eq);
      const auto disc = assemble_pencil(eq, hill);
      const auto spec = pencil_spectrum(disc);
      const double c = eq.params.c();
      int unstable = 0;
      std::vector<Complex> predicted;
      for (int k = 1; k < eq.N / 2; ++k) {
        const double kt = std::numbers::pi * k / eq.L;
        const double disc2 = c * c + kt * kt - p * chat;
        const Complex root = std::sqrt(Complex(disc2, 0.0));
        const Complex I(0.0, 1.0);
        for (double s : {1.0, -1.0}) {
          predicted.push_back(I * c * kt + s * I * kt * root);
          predicted.push_back(-I * c * kt + s * I * kt * root);
        }
        if (disc2 < 0.0) unstable += 2;
      }
      for (const Complex& z : predicted) {
        worst = std::max(worst, nearest(spec.eigenvalues, z) / std::max(1.0, std::abs(z)));
      }
      for (const Complex& z : spec.eigenvalues) {
        worst = std::max(worst, nearest(predicted, z) / std::max(1.0, std::abs(z)));
      }
      // without a speed the unstable pairs are real; with one they leave the axis
      const int kr_expected = c == 0.0 ? unstable : 0;
      const int kc_expected = c == 0.0 ? 0 : unstable;
      if (spec.k_r != kr_expected || spec.k_c != kc_expected) {
        counts = false;
        os << " p=" << p << " chat=" << chat << ": k_r=" << spec.k_r << " k_c=" << spec.k_c
           << " analytic unstable=" << unstable;
      }
    }
  }
  std::ostringstream head;
  head << std::setprecision(3) << "max relative error " << worst << " over 9 states"
       << (counts ? ", unstable counts match" : ", count mismatch:") << os.str();
  return {worst < 1e-8 && counts, head.str()};
}

// 3: cubic nonlinearity, speed sweep
Outcome cubic_sweep() {
  int checked = 0, good = 0, skipped = 0, seen_stable = 0, seen_unstable = 0;
  std::ostringstream bad;
  struct Line {
    double a, E;
    std::vector<double> chats;
  } lines[] = {{0.0, -0.1, {0.86, 0.88, 0.9, 0.92, 0.94, 0.96, 0.98, 0.99, 1.0}},
               {0.0, -0.05, {0.7, 0.8, 0.9, 0.95, 0.99}},
               {0.02, -0.05, {0.8, 0.9, 0.95, 0.99}}};
  for (const auto& line : lines) {
    for (double chat : line.chats) {
      const auto p = wave(1.0, line.a, line.E, chat);
      try {
        const auto w = analyze_wave(p, 128);
        const auto& f = w.verdict.formula;
        if (!f.chat_star) {
          bad << " " << describe(p) << " no critical speed";
          ++checked;
          continue;
        }
        const double star = *f.chat_star;
        if (std::abs(chat - star) < 1e-3) {
          ++skipped;
          continue;
        }
        ++checked;
        const int kr = chat > star ? 1 : 0;
        (kr ? seen_unstable : seen_stable)++;
        const bool ok = f.nL2 == 1 && f.n_s1 == 0 && f.nD == 1 && star > 0.0 && star < 1.0 &&
                        w.spectrum.k_r == kr && w.spectrum.k_c == 0 && w.spectrum.k_i_minus == 0;
        if (ok) {
          ++good;
        } else {
          bad << " " << describe(p) << " triple " << f.nL2 << f.n_s1 << f.nD << " chat*=" << star
              << " k_r=" << w.spectrum.k_r << " k_c=" << w.spectrum.k_c << " k_i=" << w.spectrum.k_i_minus;
        }
      } catch (const Error& e) {
        ++checked;
        bad << " " << describe(p) << " " << e.kind();
      }
    }
  }
  std::ostringstream os;
  os << good << "/" << checked << " waves with triple (1,0,1) and k_r = [chat > chat*] (" << seen_stable
     << " below, " << seen_unstable << " above, " << skipped << " skipped near chat*)" << bad.str();
  return {good == checked && seen_stable > 0 && seen_unstable > 0, os.str()};
}

// 4: one point per labeled region
Outcome region_tables() {
  struct Case {
    const char* label;
    double p, a, E;
    std::array<int, 3> triple;
  } cases[] = {{"p=2 (a)", 2, 0.05, -0.02, {1, 0, 1}},    {"p=2 (b)", 2, 0.0, 0.05, {2, 0, 1}},
               {"p=2 (c)", 2, -0.122, 0.05, {2, 1, 0}},   {"p=2 (d)", 2, -0.16, 0.05, {2, 1, 1}},
               {"p=2 (e)", 2, -0.25, 0.0, {1, 0, 1}},     {"p=4 (a)", 4, -0.1, -0.02, {1, 0, 1}},
               {"p=4 (a')", 4, -0.5, 0.0, {1, 0, 1}},     {"p=4 (b)", 4, -0.46, 0.21, {1, 0, 0}},
               {"p=4 (c)", 4, -0.385, 0.21, {2, 1, 0}},   {"p=4 (d)", 4, 0.0, 0.2, {2, 0, 1}}};
  int good = 0;
  std::ostringstream os;
  ScanOptions opt;
  opt.N = 128;
  for (const auto& c : cases) {
    const auto pt = evaluate_point(wave(c.p, c.a, c.E, 0.5), opt);
    const auto t = pt.triple();
    const bool ok = pt.ok() && t == c.triple;
    good += ok;
    os << " " << c.label << "=" << (pt.ok() ? std::to_string(t[0]) + std::to_string(t[1]) + std::to_string(t[2])
                                            : pt.status)
       << (ok ? "" : "(expected " + std::to_string(c.triple[0]) + std::to_string(c.triple[1]) +
                         std::to_string(c.triple[2]) + ")");
  }
  std::ostringstream head;
  head << good << "/10 regions reproduce their triple at chat=0.5:" << os.str();
  return {good == 10, head.str()};
}

// 5: Hamiltonian pairing and parity of complex and imaginary counts
Outcome pairing_parity() {
  double worst = 0.0;
  int spectra = 0;
  std::ostringstream bad;
  auto check = [&](const SpectrumReport& s, const std::string& name) {
    ++spectra;
    worst = std::max(worst, s.pairing_error);
    if (s.k_c % 2 != 0 || s.k_i_minus % 2 != 0) bad << " " << name << " k_c=" << s.k_c << " k_i=" << s.k_i_minus;
  };
  for (const auto& p : equality_waves()) check(analyze_wave(p, 128).spectrum, describe(p));
  for (double chat : {0.5, 0.9, 1.0}) {
    const auto eq = equilibrium_wave(wave(1.0, 0.0, 0.0, chat), 64, 7.0);
    const auto hill = assemble_hill(eq);
    check(pencil_spectrum(assemble_pencil(eq, hill)), "constant chat=" + std::to_string(chat));
  }
  std::ostringstream os;
  os << std::setprecision(3) << spectra << " spectra, max pairing error " << worst
     << (bad.str().empty() ? ", all k_c and k_i^- even" : ", odd counts:") << bad.str();
  return {worst < 1e-8 && bad.str().empty(), os.str()};
}

// 6: solitary and equilibrium limits
Outcome asymptotic_limits() {
  bool ok = true;
  std::ostringstream os;
  os << std::setprecision(4);
  for (double p : {1.0, 2.0, 3.0, 5.0}) {
    try {
      const auto v = solitary_limit_check(p, 0.5, 256);
      os << "p=" << p << " D(E->0-)=" << v.D.back() << " at E=" << v.E.back() << "; ";
    } catch (const Error& e) {
      ok = false;
      os << "p=" << p << " " << e.what() << "; ";
    }
  }
  for (double p : {1.0, 2.0, 4.0}) {
    try {
      const auto v = equilibrium_limit_check(p, 0.5);
      os << "p=" << p << " period error " << v.period_error << ", D<0 near E*, chat* " << v.chat_star.back()
         << " (c* " << v.c_star.back() << "); ";
    } catch (const Error& e) {
      ok = false;
      os << "p=" << p << " " << e.what() << "; ";
    }
  }
  return {ok, os.str()};
}

// 7: Krein-matrix zeros against the direct solve
Outcome krein_consistency() {
  int waves = 0, good = 0, matched = 0;
  std::ostringstream bad;
  for (const auto& p : {wave(1.0, 0.0, -0.1, 0.9), wave(2.0, 0.0, 0.05, 0.5), wave(2.0, -0.16, 0.05, 0.5),
                        wave(4.0, 0.0, 0.2, 0.5)}) {
    ++waves;
    const auto w = analyze_wave(p, 128);
    const auto zeros = krein_zeros(w.pencil, -3.0, 3.0);
    bool ok = true;
    int expected = 0;
    for (std::size_t i = 0; i < w.spectrum.eigenvalues.size(); ++i) {
      const Complex z = w.spectrum.eigenvalues[i];
      if (std::abs(z.real()) > w.spectrum.re_tol || std::abs(z.imag()) > 3.0) continue;
      if (w.spectrum.kernel_overlap[i] < 1e-6) continue;
      ++expected;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& k : zeros) best = std::min(best, std::abs(k.mu - z.imag()));
      if (best >= 1e-6) {
        ok = false;
        bad << " " << describe(p) << " eigenvalue " << z.imag() << "i unmatched (" << best << ")";
      }
    }
    for (const auto& k : zeros) {
      if (nearest(w.spectrum.eigenvalues, Complex(0.0, k.mu)) >= 1e-6) {
        ok = false;
        bad << " " << describe(p) << " spurious zero " << k.mu;
      }
    }
    matched += expected;
    good += ok;
  }
  std::ostringstream os;
  os << good << "/" << waves << " waves, " << matched << " imaginary eigenvalues on [-3i,3i] matched to 1e-6"
     << bad.str();
  return {good == waves && waves >= 3, os.str()};
}

// 8: generalized kernel of the companion problem
Outcome kernel_structure() {
  int good = 0, waves = 0;
  std::ostringstream os;
  for (const auto& p : {wave(1.0, 0.0, -0.1, 0.9), wave(2.0, 0.0, 0.05, 0.5), wave(2.0, -0.25, 0.0, 0.5),
                        wave(4.0, -0.5, 0.0, 0.5)}) {
    ++waves;
    const auto w = analyze_wave(p, 128);
    const int unprojected = companion_zero_count(w.pencil);
    double smallest = std::numeric_limits<double>::infinity();
    for (const Complex& z : w.spectrum.eigenvalues) smallest = std::min(smallest, std::abs(z));
    const bool ok = unprojected == 2 && smallest >= 1e-5;
    good += ok;
    os << " " << describe(p) << " zeros=" << unprojected << " min|lambda| after projection=" << std::setprecision(3)
       << smallest;
  }
  std::ostringstream head;
  head << good << "/" << waves << " waves with a double zero removed by projection:" << os.str();
  return {good == waves, head.str()};
}

// 9: sign of the conserved-quantity Jacobian product against the pencil scalar
Outcome jacobian_sign() {
  int agree = 0, agree_casimir = 0, waves = 0;
  std::ostringstream os;
  os << std::setprecision(3);
  for (const auto& p : {wave(1.0, 0.0, -0.1, 0.9), wave(1.0, 0.0, -0.1, 0.99), wave(2.0, -0.16, 0.05, 0.5),
                        wave(2.0, 0.0, 0.05, 0.5)}) {
    ++waves;
    const auto g = geom_jacobian_check(p, 128);
    agree += g.agree;
    agree_casimir += g.agree_casimir;
    os << " " << describe(p) << " product " << g.product << " scalar " << g.direct << " identity error "
       << g.identity_error << ";";
  }
  std::ostringstream head;
  head << agree << "/" << waves << " waves agree in sign with M2 = cM1 - bT (" << agree_casimir << "/" << waves
       << " with M2 = integral of v = bT - cM1):" << os.str();
  return {agree == waves && waves >= 3, head.str()};
}

// 10: growth rates, invariant drift and bounded perturbations
Outcome dynamics() {
  bool ok = true;
  int growth_ok = 0;
  double worst_drift = 0.0;
  std::ostringstream os;
  os << std::setprecision(5);
  auto grow = [&](const std::string& name, const PeriodicWave& wv, const PencilDiscretization& disc,
                  const SpectrumReport& spec, double dt) {
    const auto idx = leading_index(spec);
    const double rate = spec.eigenvalues[idx].real();
    const double unorm = grid_norm(wv.samples, wv.L);
    const double amp = 1e-7 * unorm;
    const double horizon = std::log(1e-3 * unorm / amp) / rate + 5.0 / rate;
    const auto g = growth_rate_experiment(wv, disc, spec, idx, amp, horizon, dt);
    const double err = std::abs(g.rate - rate) / rate;
    worst_drift = std::max(worst_drift, g.invariant_drift);
    if (err < 0.05) ++growth_ok;
    else ok = false;
    os << name << " rate " << g.rate << " vs " << rate << " (" << 100 * err << "%); ";
  };
  for (const auto& [p, dt] : {std::pair{wave(1.0, 0.0, -0.1, 0.99), 0.005}, std::pair{wave(2.0, 0.0, 0.1, 0.9), 0.005}}) {
    const auto w = analyze_wave(p, 128);
    grow(describe(p), w.wave, w.pencil, w.spectrum, dt);
  }
  {
    const auto eq = equilibrium_wave(wave(1.0, 0.0, 0.0, 1.0), 64, 5.0);
    const auto hill = assemble_hill(eq);
    const auto disc = assemble_pencil(eq, hill);
    const auto spec = pencil_spectrum(disc);
    double analytic = 0.0;
    for (int k = 1; k < eq.N / 2; ++k) {
      const double kt = std::numbers::pi * k / eq.L;
      if (kt * kt < 1.0) analytic = std::max(analytic, kt * std::sqrt(1.0 - kt * kt));
    }
    const double lead = spec.eigenvalues[leading_index(spec)].real();
    if (std::abs(lead - analytic) > 1e-10) ok = false;
    grow("constant state (analytic " + std::to_string(analytic) + ")", eq, disc, spec, 0.01);
  }
  {
    const auto w = analyze_wave(wave(1.0, 0.0, -0.1, 0.9), 128);
    if (w.verdict.direct != 0) ok = false;
    const Vector x = w.wave.nodes();
    const Vector du = 1e-5 * (std::numbers::pi * x.array() / w.wave.L).cos().matrix();
    const auto r = bounded_perturbation_run(w.wave, du, Vector::Zero(w.wave.N), 200.0, 0.01);
    worst_drift = std::max(worst_drift, r.invariant_drift);
    if (!(r.max_ratio < 10.0)) ok = false;
    os << "index-zero wave max distance ratio " << r.max_ratio << " over t=200; ";
  }
  if (!(worst_drift < 1e-6)) ok = false;
  os << "max invariant drift " << worst_drift;
  return {ok && growth_ok >= 3, os.str()};
}

// 11: resolution independence of the lowest eigenvalues
Outcome convergence() {
  double worst_hill = 0.0, worst_pencil = 0.0;
  std::ostringstream os;
  for (const auto& p : {wave(1.0, 0.0, -0.1, 0.9), wave(2.0, 0.0, 0.05, 0.5), wave(4.0, 0.0, 0.2, 0.5)}) {
    const auto coarse = analyze_wave(p, 128);
    const auto fine = analyze_wave(p, 256);
    for (int i = 0; i < 10; ++i) {
      worst_hill = std::max(worst_hill, std::abs(coarse.hill.eigenvalues[i] - fine.hill.eigenvalues[i]));
    }
    auto smallest = [](std::vector<Complex> v) {
      std::sort(v.begin(), v.end(), [](Complex x, Complex y) { return std::abs(x) < std::abs(y); });
      v.resize(10);
      return v;
    };
    const auto fine_set = fine.spectrum.eigenvalues;
    for (const Complex& z : smallest(coarse.spectrum.eigenvalues)) {
      worst_pencil = std::max(worst_pencil, nearest(fine_set, z));
    }
  }
  os << std::setprecision(3) << "max change N=128 to 256: Hill " << worst_hill << ", pencil " << worst_pencil
     << " (3 waves, 10 eigenvalues each)";
  return {worst_hill < 1e-8 && worst_pencil < 1e-8, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"index equality", index_equality},
      {"constant-state dispersion", constant_state_dispersion},
      {"cubic speed sweep", cubic_sweep},
      {"region triples", region_tables},
      {"pairing and parity", pairing_parity},
      {"asymptotic limits", asymptotic_limits},
      {"Krein matrix zeros", krein_consistency},
      {"kernel structure", kernel_structure},
      {"Jacobian sign", jacobian_sign},
      {"dynamics", dynamics},
      {"convergence", convergence},
  };
  std::vector<int> which;
  if (argc > 1) {
    which.push_back(std::atoi(argv[1]));
  } else {
    for (int i = 1; i <= static_cast<int>(checks.size()); ++i) which.push_back(i);
  }
  bool all = true;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(checks.size())) {
      std::cerr << "usage: acceptance [1.." << checks.size() << "]\n";
      return 64;
    }
    Outcome o;
    try {
      o = checks[n - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << n << " " << checks[n - 1].first << ": " << o.detail
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
