#pragma once

// Scans of the (a, E) plane at fixed (p, ĉ), limit checks along a = b = 0,
// and CSV / JSON / SVG writers for scan grids.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gbstab/errors.hpp"
#include "gbstab/hill.hpp"
#include "gbstab/index.hpp"
#include "gbstab/io.hpp"
#include "gbstab/pencil.hpp"
#include "gbstab/profile.hpp"

namespace gbstab {

struct ScanPoint {
  WaveParameters params;
  std::string status = "ok";  ///< ok | nonexistent | degenerate | error:<kind>
  std::string detail;
  int nL2 = 0;
  int n_s1 = 0;
  int nD = 0;
  int n_scalar = 0;
  int count = 0;
  std::optional<double> chat_star;

  bool ok() const { return status == "ok"; }
  std::array<int, 3> triple() const { return {nL2, n_s1, nD}; }
};

struct ScanOptions {
  int N = 64;
  int workers = 1;
  /// Which well to follow where V has two: 0 = rightmost, 1 = next to the left.
  int well_from_right = 0;
  Tolerances tol;
};

struct ScanGrid {
  double p = 1.0;
  double chat = 0.5;
  double a_min = 0.0, a_max = 0.0;
  double E_min = 0.0, E_max = 0.0;
  int resolution = 0;
  ScanOptions options;
  std::vector<ScanPoint> points;  ///< E-major: index = iE·resolution + ia

  const ScanPoint& at(int ia, int iE) const { return points[iE * resolution + ia]; }
};

/// Formula index at one parameter point; failures become statuses.
inline ScanPoint evaluate_point(WaveParameters params, const ScanOptions& opt) {
  ScanPoint pt;
  try {
    if (opt.well_from_right > 0 && !params.well_hint) {
      const auto centers = well_centers(params, opt.tol);
      const int idx = static_cast<int>(centers.size()) - 1 - opt.well_from_right;
      if (idx < 0) throw NonexistenceError("requested well does not exist");
      params.well_hint = centers[idx];
    }
    pt.params = params;
    const auto wave = sample_profile(params, opt.N, opt.tol);
    const auto hill = assemble_hill(wave, opt.tol);
    const auto rep = index_from_formula(wave, hill);
    pt.nL2 = rep.nL2;
    pt.n_s1 = rep.n_s1;
    pt.nD = rep.nD;
    pt.n_scalar = rep.n_scalar;
    pt.count = rep.count;
    pt.chat_star = rep.chat_star;
  } catch (const NonexistenceError& e) {
    pt.status = "nonexistent";
    pt.detail = e.what();
  } catch (const DegenerateOrbitError& e) {
    pt.status = "degenerate";
    pt.detail = e.what();
  } catch (const Error& e) {
    pt.status = "error:" + e.kind();
    pt.detail = e.what();
  }
  pt.params = params;
  return pt;
}

/// Index triple on a resolution × resolution grid of (a, E). Points are
/// independent; `on_point` (if set) sees each finished point in grid order.
inline ScanGrid scan_plane(double p, std::pair<double, double> a_range,
                           std::pair<double, double> E_range, double chat, int resolution,
                           const ScanOptions& opt = {},
                           const std::function<void(const ScanPoint&)>& on_point = {}) {
  if (resolution < 2) throw InvalidArgument("scan resolution must be at least 2");
  for (double x : {a_range.first, a_range.second, E_range.first, E_range.second}) {
    if (!std::isfinite(x)) throw InvalidArgument("scan ranges must be finite");
  }
  ScanGrid grid;
  grid.p = p;
  grid.chat = chat;
  grid.a_min = a_range.first;
  grid.a_max = a_range.second;
  grid.E_min = E_range.first;
  grid.E_max = E_range.second;
  grid.resolution = resolution;
  grid.options = opt;
  const int total = resolution * resolution;
  grid.points.resize(total);

  auto params_at = [&](int idx) {
    const int ia = idx % resolution, iE = idx / resolution;
    WaveParameters w;
    w.p = p;
    w.chat = chat;
    w.a = a_range.first + (a_range.second - a_range.first) * ia / (resolution - 1);
    w.E = E_range.first + (E_range.second - E_range.first) * iE / (resolution - 1);
    return w;
  };

  const int workers = std::max(1, opt.workers);
  std::vector<char> done(total, 0);
  std::atomic<int> next{0};
  std::mutex mtx;
  int emitted = 0;
  auto flush = [&]() {
    // emit the finished prefix in grid order
    while (emitted < total && done[emitted]) {
      if (on_point) on_point(grid.points[emitted]);
      ++emitted;
    }
  };
  auto work = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= total) break;
      ScanPoint pt = evaluate_point(params_at(idx), opt);
      std::lock_guard<std::mutex> lock(mtx);
      grid.points[idx] = std::move(pt);
      done[idx] = 1;
      flush();
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return grid;
}

inline std::string csv_header() { return "p,a,E,chat,status,nL2,n_s1,nD,count,chat_star"; }

inline std::string csv_row(const ScanPoint& pt) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << pt.params.p << ',' << pt.params.a << ',' << pt.params.E << ',' << pt.params.chat << ','
     << pt.status << ',';
  if (pt.ok()) {
    os << pt.nL2 << ',' << pt.n_s1 << ',' << pt.nD << ',' << pt.count << ',';
    if (pt.chat_star) os << *pt.chat_star;
  } else {
    os << ",,,,";
  }
  return os.str();
}

inline std::string to_csv(const ScanGrid& grid) {
  std::string out = csv_header() + "\n";
  for (const auto& pt : grid.points) out += csv_row(pt) + "\n";
  return out;
}

inline json to_json(const ScanPoint& pt) {
  json j{{"p", pt.params.p}, {"a", pt.params.a}, {"E", pt.params.E}, {"chat", pt.params.chat},
         {"status", pt.status}};
  if (pt.ok()) {
    j["nL2"] = pt.nL2;
    j["n_s1"] = pt.n_s1;
    j["nD"] = pt.nD;
    j["count"] = pt.count;
    j["chat_star"] = pt.chat_star ? json(*pt.chat_star) : json(nullptr);
  } else {
    j["detail"] = pt.detail;
  }
  return j;
}

inline json to_json(const ScanGrid& grid, const std::string& hash = "") {
  json meta{{"grid",
             {{"p", grid.p},
              {"chat", grid.chat},
              {"a_range", {grid.a_min, grid.a_max}},
              {"E_range", {grid.E_min, grid.E_max}},
              {"resolution", grid.resolution},
              {"N", grid.options.N},
              {"well_from_right", grid.options.well_from_right}}},
            {"tolerances", to_json(grid.options.tol)},
            {"version", GBSTAB_VERSION}};
  if (!hash.empty()) meta["config_hash"] = hash;
  json pts = json::array();
  for (const auto& pt : grid.points) pts.push_back(to_json(pt));
  return json{{"metadata", meta}, {"points", pts}};
}

/// Heatmap of `count`; nonexistent nodes are left light gray, degenerate
/// nodes dark gray, and failed nodes are outlined in red.
inline std::string to_svg(const ScanGrid& grid, int cell = 8) {
  const int r = grid.resolution;
  const int margin = 40;
  const int w = r * cell + 2 * margin, h = r * cell + 2 * margin;
  static const char* palette[] = {"#2c7bb6", "#fdae61", "#d7191c", "#7b3294", "#1a9641"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int iE = 0; iE < r; ++iE) {
    for (int ia = 0; ia < r; ++ia) {
      const auto& pt = grid.at(ia, iE);
      const int x = margin + ia * cell;
      const int y = margin + (r - 1 - iE) * cell;
      std::string fill = "#eeeeee";
      std::string stroke;
      if (pt.ok()) {
        fill = palette[std::clamp(pt.count, 0, 4)];
      } else if (pt.status == "degenerate") {
        fill = "#555555";
      } else if (pt.status != "nonexistent") {
        fill = "#ffffff";
        stroke = " stroke=\"red\" stroke-width=\"1\"";
      }
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"" << fill << "\"" << stroke << "/>\n";
    }
  }
  os << "<text x=\"" << margin << "\" y=\"" << h - 10 << "\" font-size=\"12\">a in [" << grid.a_min
     << ", " << grid.a_max << "], E in [" << grid.E_min << ", " << grid.E_max << "], p=" << grid.p
     << ", chat=" << grid.chat << "</text>\n";
  for (int c = 0; c <= 4; ++c) {
    os << "<rect x=\"" << margin + c * 60 << "\" y=\"8\" width=\"12\" height=\"12\" fill=\""
       << palette[c] << "\"/><text x=\"" << margin + c * 60 + 16 << "\" y=\"19\" font-size=\"12\">"
       << (c == 4 ? "4+" : std::to_string(c)) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Depth of the nonlinear center for a = b = 0: E* = V(ĉ^{1/p}).
inline double center_energy(double p, double chat) {
  const double u = std::pow(chat, 1.0 / p);
  return -0.5 * chat * u * u + std::pow(u, p + 2.0) / (p + 2.0);
}

struct LimitVerdict {
  std::vector<double> E;
  std::vector<double> D;
  std::vector<double> period;
  int expected_sign = 0;
  bool ok = false;
  std::string detail;
};

/// sign(D) along E = −{1e−2, 1e−3, 1e−4, …}·|E*| with a = b = 0. Decades past
/// 1e−4 (down to 1e−6) are added only while the last two samples disagree in
/// sign. For p = 4 the verdict is a decreasing |D| instead of a sign.
inline LimitVerdict solitary_limit_check(double p, double chat, int N = 256,
                                         const Tolerances& tol = {}) {
  LimitVerdict v;
  const double scale = std::abs(center_energy(p, chat));
  v.expected_sign = p < 4.0 ? -1 : (p > 4.0 ? 1 : 0);
  auto sgn = [](double x) { return x < 0.0 ? -1 : 1; };
  double f = 1e-2;
  for (int i = 0; i < 5; ++i, f *= 0.1) {
    const std::size_t n = v.D.size();
    if (n >= 3 && (v.expected_sign == 0 || sgn(v.D[n - 1]) == sgn(v.D[n - 2]))) break;
    WaveParameters w;
    w.p = p;
    w.chat = chat;
    w.E = -f * scale;
    const auto wave = sample_profile(w, N, tol);
    const auto hill = assemble_hill(wave, tol);
    v.E.push_back(w.E);
    v.D.push_back(gkdv_scalars(hill).Dgkdv);
    v.period.push_back(2.0 * wave.L);
  }
  std::ostringstream os;
  os << std::setprecision(6) << "D at E = ";
  for (std::size_t i = 0; i < v.E.size(); ++i) os << v.E[i] << ": " << v.D[i] << "; ";
  v.detail = os.str();
  const std::size_t n = v.D.size();
  if (v.expected_sign == 0) {
    v.ok = std::abs(v.D[2]) < std::abs(v.D[1]) && std::abs(v.D[1]) < std::abs(v.D[0]);
  } else {
    v.ok = sgn(v.D[n - 1]) == v.expected_sign && sgn(v.D[n - 2]) == v.expected_sign;
  }
  if (!v.ok) throw LimitInconclusive("solitary limit did not settle: " + v.detail);
  return v;
}

struct EquilibriumVerdict {
  double period_limit = 0.0;      ///< 2π/√(pĉ)
  double period_near = 0.0;       ///< T at the closest sampled energy
  double period_error = 0.0;      ///< relative
  std::vector<double> offsets;    ///< (E − E*)/|E*|
  std::vector<double> D;
  std::vector<double> chat_star;  ///< NaN where undefined
  std::vector<double> c_star;     ///< same threshold as a speed, √(1 − ĉ*)
  bool D_negative = false;
  bool chat_star_to_one = false;  ///< ĉ* increases toward 1 as E → E*
  bool equilibrium_stable = false;
  int equilibrium_k_r = 0;
  int equilibrium_k_c = 0;
  bool ok = false;
};

inline EquilibriumVerdict equilibrium_limit_check(double p, double chat, int N = 64,
                                                  const Tolerances& tol = {}) {
  EquilibriumVerdict v;
  const double e_star = center_energy(p, chat);
  const double scale = std::abs(e_star);
  v.period_limit = 2.0 * std::numbers::pi / std::sqrt(p * chat);
  {
    WaveParameters w;
    w.p = p;
    w.chat = chat;
    w.E = e_star + 1e-6 * scale;
    v.period_near = 2.0 * half_period(w, tol);
    v.period_error = std::abs(v.period_near - v.period_limit) / v.period_limit;
  }
  v.D_negative = true;
  for (double f : {1e-1, 1e-2, 1e-3}) {
    WaveParameters w;
    w.p = p;
    w.chat = chat;
    w.E = e_star + f * scale;
    const auto wave = sample_profile(w, N, tol);
    const auto hill = assemble_hill(wave, tol);
    const auto rep = index_from_formula(wave, hill);
    v.offsets.push_back(f);
    v.D.push_back(rep.Dgkdv);
    v.chat_star.push_back(rep.chat_star ? *rep.chat_star : std::numeric_limits<double>::quiet_NaN());
    v.c_star.push_back(rep.chat_star ? std::sqrt(std::max(0.0, 1.0 - *rep.chat_star))
                                     : std::numeric_limits<double>::quiet_NaN());
    if (!(rep.Dgkdv < 0.0)) v.D_negative = false;
  }
  v.chat_star_to_one = v.D_negative && v.chat_star[0] < v.chat_star[1] &&
                       v.chat_star[1] < v.chat_star[2] && v.chat_star[2] < 1.0;

  // the equilibrium on its limit period: every mode of the dispersion relation
  // λ = ick̃ ± ik̃√(c² + k̃² − pĉ) is imaginary
  WaveParameters w;
  w.p = p;
  w.chat = chat;
  const auto eq = equilibrium_wave(w, N, std::nullopt, tol);
  const auto hill = assemble_hill(eq, tol);
  const auto disc = assemble_pencil(eq, hill, tol);
  const auto spec = pencil_spectrum(disc);
  v.equilibrium_k_r = spec.k_r;
  v.equilibrium_k_c = spec.k_c;
  const double c2 = 1.0 - chat;
  bool analytic_stable = true;
  for (int k = 1; k < N / 2; ++k) {
    const double kt = std::numbers::pi * k / eq.L;
    if (c2 + kt * kt - p * chat < -1e-12) analytic_stable = false;
  }
  v.equilibrium_stable = analytic_stable && spec.k_r == 0 && spec.k_c == 0;
  v.ok = v.period_error < 1e-4 && v.D_negative && v.chat_star_to_one && v.equilibrium_stable;
  if (!v.ok) {
    std::ostringstream os;
    os << std::setprecision(6) << "equilibrium limit failed: period error " << v.period_error
       << ", D negative " << v.D_negative << ", chat* trend " << v.chat_star_to_one
       << ", constant state stable " << v.equilibrium_stable;
    throw LimitInconclusive(os.str());
  }
  return v;
}

}  // namespace gbstab
