// gbstab command-line driver.
//
// Exit codes: 0 success, 1 verify mismatch, 2 nonexistence or degeneracy,
// 64 usage, 70 numeric failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gbstab/atlas.hpp"
#include "gbstab/errors.hpp"
#include "gbstab/evolve.hpp"
#include "gbstab/hill.hpp"
#include "gbstab/index.hpp"
#include "gbstab/io.hpp"
#include "gbstab/pencil.hpp"
#include "gbstab/profile.hpp"

using namespace gbstab;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kNonexistence = 2;
constexpr int kUsage = 64;
constexpr int kNumeric = 70;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values; unset optionals fall back to the config file, then defaults.
struct Flags {
  std::string config_path;
  std::string out;
  std::optional<double> p, a, b, E, chat, csign, well_hint, L;
  std::optional<int> N;
  bool constant = false;
  std::vector<std::string> tol_overrides;
  // scan
  std::optional<double> a_min, a_max, E_min, E_max;
  std::optional<int> resolution, workers, well_from_right;
  // evolve
  std::string mode;
  std::optional<double> horizon, dt, amplitude;
  std::optional<int> sample_every;
  bool snapshots = false;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
}

// Merges flags over the file config into the effective run config.
json effective_config(const std::string& command, const Flags& f) {
  json cfg = load_config(f.config_path);
  if (!cfg.is_object()) throw UsageError("config root must be an object");
  json& wave = cfg["wave"];
  if (wave.is_null()) wave = json::object();
  auto set = [](json& j, const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  set(wave, "p", f.p);
  set(wave, "a", f.a);
  set(wave, "b", f.b);
  set(wave, "E", f.E);
  set(wave, "chat", f.chat);
  set(wave, "csign", f.csign);
  set(wave, "well_hint", f.well_hint);
  set(cfg, "N", f.N);
  set(cfg, "L", f.L);
  if (f.constant) cfg["constant"] = true;

  Tolerances tol;
  if (cfg.contains("tolerances")) update_from_json(tol, cfg["tolerances"]);
  for (const auto& kv : f.tol_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--tol expects key=value, got '" + kv + "'");
    json one;
    try {
      one[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--tol value is not a number in '" + kv + "'");
    }
    if (kv.substr(0, eq) == "root_scan_points") one[kv.substr(0, eq)] = std::stoi(kv.substr(eq + 1));
    update_from_json(tol, one);
  }
  cfg["tolerances"] = to_json(tol);

  if (command == "scan") {
    json& s = cfg["scan"];
    if (s.is_null()) s = json::object();
    if (f.a_min || f.a_max) s["a_range"] = {f.a_min.value_or(s.value("a_range", json{-1.0, 1.0})[0].get<double>()),
                                            f.a_max.value_or(s.value("a_range", json{-1.0, 1.0})[1].get<double>())};
    if (f.E_min || f.E_max) s["E_range"] = {f.E_min.value_or(s.value("E_range", json{-1.0, 1.0})[0].get<double>()),
                                            f.E_max.value_or(s.value("E_range", json{-1.0, 1.0})[1].get<double>())};
    set(s, "resolution", f.resolution);
    set(s, "workers", f.workers);
    set(s, "well_from_right", f.well_from_right);
    if (!s.contains("a_range")) s["a_range"] = {-1.0, 1.0};
    if (!s.contains("E_range")) s["E_range"] = {-1.0, 1.0};
    if (!s.contains("resolution")) s["resolution"] = 64;
    if (!s.contains("workers")) s["workers"] = 1;
    if (!s.contains("well_from_right")) s["well_from_right"] = 0;
  }
  if (command == "evolve") {
    json& e = cfg["evolve"];
    if (e.is_null()) e = json::object();
    if (!f.mode.empty()) e["mode"] = f.mode;
    set(e, "horizon", f.horizon);
    set(e, "dt", f.dt);
    set(e, "amplitude", f.amplitude);
    set(e, "sample_every", f.sample_every);
    if (f.snapshots) e["snapshots"] = true;
    if (!e.contains("mode")) e["mode"] = "traveling";
    if (!e.contains("dt")) e["dt"] = 0.005;
    if (!e.contains("sample_every")) e["sample_every"] = 10;
  }
  if (!cfg.contains("N")) cfg["N"] = command == "scan" ? 64 : 128;
  return cfg;
}

WaveParameters wave_from(const json& cfg) {
  const json& w = cfg.at("wave");
  WaveParameters p;
  for (const char* key : {"p", "chat"}) {
    if (!w.contains(key)) throw UsageError(std::string("missing wave parameter --") + key);
  }
  p.p = w.at("p").get<double>();
  p.chat = w.at("chat").get<double>();
  p.a = w.value("a", 0.0);
  p.b = w.value("b", 0.0);
  p.E = w.value("E", 0.0);
  p.csign = w.value("csign", 1.0);
  if (w.contains("well_hint")) p.well_hint = w.at("well_hint").get<double>();
  return p;
}

int grid_size(const json& cfg) {
  const int n = cfg.at("N").get<int>();
  if (n < 32 || n % 2 != 0) {
    throw UsageError("grid size must be even and at least 32, got " + std::to_string(n));
  }
  return n;
}

Tolerances tolerances_from(const json& cfg) {
  Tolerances t;
  update_from_json(t, cfg.at("tolerances"));
  return t;
}

json header(const std::string& command, const json& cfg) {
  return json{{"command", command},
              {"version", GBSTAB_VERSION},
              {"config", cfg},
              {"config_hash", config_hash(cfg)},
              {"tolerances", cfg.at("tolerances")}};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

void emit(const json& doc, const std::string& out, const std::string& suffix = ".json") {
  const std::string text = doc.dump(2) + "\n";
  if (!out.empty()) write_file(out + suffix, text);
  std::cout << text;
}

PeriodicWave build_wave(const json& cfg, const Tolerances& tol) {
  const auto params = wave_from(cfg);
  const int n = grid_size(cfg);
  if (cfg.value("constant", false)) {
    std::optional<double> L;
    if (cfg.contains("L")) L = cfg.at("L").get<double>();
    return equilibrium_wave(params, n, L, tol);
  }
  return sample_profile(params, n, tol);
}

json wave_summary(const PeriodicWave& w) {
  return json{{"params", to_json(w.params)},
              {"N", w.N},
              {"half_period", w.L},
              {"period", 2.0 * w.L},
              {"wavespeed", w.params.c()},
              {"Umean", w.Umean},
              {"Uminus", w.Uminus},
              {"Uplus", w.Uplus},
              {"residual", w.residual},
              {"quadrature_error", w.quadrature_error},
              {"constant", w.constant}};
}

json index_json(const IndexReport& r) {
  return json{{"nL2", r.nL2},
              {"n_s1", r.n_s1},
              {"nD", r.nD},
              {"n_scalar", r.n_scalar},
              {"count", r.count},
              {"gkdv_count", r.gkdv_count},
              {"s1", r.s1},
              {"sUU", r.sUU},
              {"sU1", r.sU1},
              {"Dgkdv", r.Dgkdv},
              {"mean_free_norm2", r.mean_free_norm2},
              {"scalar", r.scalar},
              {"chat_star", r.chat_star ? json(*r.chat_star) : json(nullptr)},
              {"c_star", r.chat_star && *r.chat_star < 1.0 && *r.chat_star > 0.0
                             ? json(std::sqrt(1.0 - *r.chat_star))
                             : json(nullptr)},
              {"constant", r.constant}};
}

json spectrum_json(const SpectrumReport& s) {
  json eig = json::array();
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    eig.push_back({{"lambda", complex_json(s.eigenvalues[i])},
                   {"kernel_overlap", s.kernel_overlap[i]}});
  }
  json modes = json::array();
  for (const auto& m : s.imaginary_modes) {
    modes.push_back({{"lambda", complex_json(m.lambda)},
                     {"multiplicity", m.multiplicity},
                     {"negative", m.negative},
                     {"krein_value", m.krein_value},
                     {"krein_sign", m.krein_sign}});
  }
  return json{{"k_r", s.k_r},
              {"k_c", s.k_c},
              {"k_i_minus", s.k_i_minus},
              {"index", s.index()},
              {"zero_modes", s.zero_modes},
              {"pairing_error", s.pairing_error},
              {"radius", s.radius},
              {"re_tol", s.re_tol},
              {"im_tol", s.im_tol},
              {"eigenvalues", eig},
              {"imaginary_modes", modes}};
}

// Constant states: λ = ick̃ ± ik̃√(c² + k̃² − pĉ) per retained mode.
json dispersion_json(const PencilDiscretization& disc, const SpectrumReport& s) {
  const auto& w = disc.wave.params;
  const double c = w.c();
  const double pc = w.p * w.chat;
  std::vector<Complex> predicted;
  int unstable_real = 0, unstable_complex = 0;
  for (int k = 1; k <= disc.size() / 2; ++k) {
    const double kt = std::numbers::pi * k / disc.wave.L;
    const Complex root = std::sqrt(Complex(c * c + kt * kt - pc, 0.0));
    const Complex I(0.0, 1.0);
    for (double sign : {1.0, -1.0}) {
      // both ±k̃ columns of the trigonometric basis
      predicted.push_back(I * c * kt + sign * I * kt * root);
      predicted.push_back(-I * c * kt + sign * I * kt * root);
    }
    if (c * c + kt * kt - pc < 0.0) (c == 0.0 ? unstable_real : unstable_complex) += 2;
  }
  double worst = 0.0;
  for (const Complex& z : predicted) {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& e : s.eigenvalues) best = std::min(best, std::abs(e - z));
    worst = std::max(worst, best / std::max(1.0, std::abs(z)));
  }
  json pred = json::array();
  for (const Complex& z : predicted) pred.push_back(complex_json(z));
  return json{{"predicted", pred}, {"max_relative_error", worst}, {"analytic_k_r", unstable_real},
              {"analytic_k_c", unstable_complex}};
}

int cmd_profile(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const auto wave = build_wave(cfg, tol);
  json doc = header("profile", cfg);
  doc["wave"] = wave_summary(wave);
  const Vector x = wave.nodes();
  doc["x"] = std::vector<double>(x.data(), x.data() + x.size());
  doc["U"] = std::vector<double>(wave.samples.data(), wave.samples.data() + wave.samples.size());
  if (!out.empty()) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "x,U\n";
    for (int j = 0; j < wave.N; ++j) csv << x[j] << ',' << wave.samples[j] << '\n';
    csv << "# config_hash=" << config_hash(cfg) << " tolerances=" << cfg.at("tolerances").dump()
        << '\n';
    write_file(out + ".csv", csv.str());
  }
  emit(doc, out);
  return kOk;
}

int cmd_index(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const auto wave = build_wave(cfg, tol);
  const auto hill = assemble_hill(wave, tol);
  json doc = header("index", cfg);
  doc["wave"] = wave_summary(wave);
  doc["hill"] = {{"zero_count", hill.zero_count},
                 {"kernel_tol", hill.kernel_tol},
                 {"kernel_residual", hill.kernel_residual}};
  doc["index"] = index_json(index_from_formula(wave, hill));
  emit(doc, out);
  return kOk;
}

int cmd_spectrum(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const auto wave = build_wave(cfg, tol);
  const auto hill = assemble_hill(wave, tol);
  const auto disc = assemble_pencil(wave, hill, tol);
  const auto spec = pencil_spectrum(disc);
  json doc = header("spectrum", cfg);
  doc["wave"] = wave_summary(wave);
  doc["spectrum"] = spectrum_json(spec);
  doc["companion_zero_count"] = companion_zero_count(disc);
  if (wave.constant) doc["dispersion"] = dispersion_json(disc, spec);
  emit(doc, out);
  return kOk;
}

int cmd_verify(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const auto wave = build_wave(cfg, tol);
  const auto hill = assemble_hill(wave, tol);
  const auto disc = assemble_pencil(wave, hill, tol);
  const auto spec = pencil_spectrum(disc);
  const auto v = verify_index(wave, hill, disc, spec);
  json doc = header("verify", cfg);
  doc["wave"] = wave_summary(wave);
  doc["formula"] = index_json(v.formula);
  doc["direct"] = {{"k_r", v.k_r}, {"k_c", v.k_c}, {"k_i_minus", v.k_i_minus}, {"count", v.direct}};
  doc["equal"] = v.equal;
  doc["pencil_scalar"] = v.pencil_scalar;
  doc["reconcile_error"] = v.reconcile_error;
  doc["reconciled"] = v.reconciled;
  doc["hypothesis_i"] = v.hypothesis_i;
  doc["hypothesis_i_ok"] = v.hypothesis_i_ok;
  doc["hypothesis_ii_ok"] = v.hypothesis_ii_ok;
  doc["projected_negative"] = v.projected_negative;
  doc["pairing_error"] = spec.pairing_error;
  doc["ok"] = v.ok();
  emit(doc, out);
  return v.ok() ? kOk : kMismatch;
}

int cmd_scan(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const json& w = cfg.at("wave");
  if (!w.contains("p") || !w.contains("chat")) throw UsageError("scan needs --p and --chat");
  const json& s = cfg.at("scan");
  ScanOptions opt;
  opt.N = grid_size(cfg);
  opt.workers = s.at("workers").get<int>();
  opt.well_from_right = s.at("well_from_right").get<int>();
  opt.tol = tol;
  const int resolution = s.at("resolution").get<int>();
  if (resolution < 2) throw UsageError("--resolution must be at least 2");
  if (opt.workers < 1) throw UsageError("--workers must be at least 1");
  const std::pair<double, double> ar{s.at("a_range")[0].get<double>(), s.at("a_range")[1].get<double>()};
  const std::pair<double, double> er{s.at("E_range")[0].get<double>(), s.at("E_range")[1].get<double>()};

  std::ofstream csv_file;
  if (!out.empty()) {
    csv_file.open(out + ".csv");
    if (!csv_file) throw UsageError("cannot write '" + out + ".csv'");
  }
  std::ostream& csv = out.empty() ? std::cout : csv_file;
  csv << csv_header() << '\n' << std::flush;
  const auto grid = scan_plane(w.at("p").get<double>(), ar, er, w.at("chat").get<double>(),
                               resolution, opt, [&](const ScanPoint& pt) {
                                 csv << csv_row(pt) << '\n' << std::flush;
                               });
  const std::string hash = config_hash(cfg);
  csv << "# config_hash=" << hash << " tolerances=" << cfg.at("tolerances").dump() << '\n';
  if (!out.empty()) {
    json doc = to_json(grid, hash);
    doc["metadata"]["config"] = cfg;
    write_file(out + ".json", doc.dump(2) + "\n");
    std::string svg = to_svg(grid);
    svg.insert(svg.find('\n') + 1, "<!-- config_hash=" + hash + " tolerances=" +
                                       cfg.at("tolerances").dump() + " -->\n");
    write_file(out + ".svg", svg);
    int ok = 0, nonexistent = 0, degenerate = 0, failed = 0;
    for (const auto& pt : grid.points) {
      if (pt.ok()) ++ok;
      else if (pt.status == "nonexistent") ++nonexistent;
      else if (pt.status == "degenerate") ++degenerate;
      else ++failed;
    }
    json summary = header("scan", cfg);
    summary["points"] = {{"ok", ok}, {"nonexistent", nonexistent}, {"degenerate", degenerate},
                         {"error", failed}};
    std::cout << summary.dump(2) << '\n';
  }
  return kOk;
}

int cmd_evolve(const json& cfg, const std::string& out) {
  const auto tol = tolerances_from(cfg);
  const auto wave = build_wave(cfg, tol);
  const json& e = cfg.at("evolve");
  const std::string mode = e.at("mode").get<std::string>();
  const double dt = e.at("dt").get<double>();
  const int every = e.at("sample_every").get<int>();
  if (!(dt > 0.0) || every < 1) throw UsageError("--dt must be positive and --sample-every at least 1");
  const double unorm = grid_norm(wave.samples, wave.L);
  const double c = wave.params.c();
  json doc = header("evolve", cfg);
  doc["wave"] = wave_summary(wave);
  doc["mode"] = mode;
  SimulationState final_state;

  if (mode == "traveling") {
    // one temporal period 2L/|c|, or a fixed horizon for standing waves
    const double horizon = e.value("horizon", c != 0.0 ? 2.0 * wave.L / std::abs(c) : 10.0);
    SimulationState st = traveling_state(wave);
    const BoussinesqIntegrator integ(wave.N, wave.L, wave.params.p);
    st.invariants_log.push_back(integ.invariants(st.u, st.v, 0.0));
    const int steps = static_cast<int>(std::ceil(horizon / dt));
    double sup = 0.0;
    json times = json::array(), errors = json::array();
    for (int s = 1; s <= steps; ++s) {
      integ.step(st, std::min(dt, horizon - st.t));
      if (s % every == 0 || s == steps) {
        const Vector ref = spectral_shift(wave.samples, wave.L, c * st.t);
        const double err = (st.u - ref).cwiseAbs().maxCoeff();
        sup = std::max(sup, err);
        times.push_back(st.t);
        errors.push_back(err);
        st.invariants_log.push_back(integ.invariants(st.u, st.v, st.t));
      }
    }
    doc["horizon"] = horizon;
    doc["times"] = times;
    doc["sup_errors"] = errors;
    doc["sup_error"] = sup;
    doc["invariant_drift"] = invariant_drift(st.invariants_log);
    final_state = st;
  } else if (mode == "growth") {
    const auto hill = assemble_hill(wave, tol);
    const auto disc = assemble_pencil(wave, hill, tol);
    const auto spec = pencil_spectrum(disc);
    if (spec.k_r + spec.k_c == 0) {
      throw InconclusiveError("spectrum has no eigenvalue with positive real part");
    }
    const std::size_t lead = spec.leading();
    const double amp = e.value("amplitude", 1e-6 * unorm);
    const double rate = spec.eigenvalues[lead].real();
    const double horizon = e.value("horizon", std::log(1e-3 * unorm / amp) / rate + 5.0 / rate);
    const auto g = growth_rate_experiment(wave, disc, spec, lead, amp, horizon, dt, every);
    doc["lambda"] = complex_json(spec.eigenvalues[lead]);
    doc["amplitude"] = amp;
    doc["horizon"] = horizon;
    doc["rate"] = g.rate;
    doc["predicted"] = g.predicted;
    doc["relative_error"] = std::abs(g.rate - g.predicted) / std::abs(g.predicted);
    doc["window"] = {g.window_start, g.window_end};
    doc["window_samples"] = g.window_samples;
    doc["invariant_drift"] = g.invariant_drift;
    doc["times"] = g.times;
    doc["perturbation_norms"] = g.norms;
  } else if (mode == "bounded") {
    const double amp = e.value("amplitude", 1e-6 * unorm);
    const double horizon = e.value("horizon", 50.0);
    // smooth mean-carrying perturbation: a low cosine mode plus a constant
    Vector du(wave.N), dv(wave.N);
    const Vector x = wave.nodes();
    for (int j = 0; j < wave.N; ++j) {
      du[j] = std::cos(std::numbers::pi * x[j] / wave.L) + 0.5;
      dv[j] = std::sin(std::numbers::pi * x[j] / wave.L);
    }
    const double nrm = std::sqrt(grid_inner(du, du, wave.L) + grid_inner(dv, dv, wave.L));
    du *= amp / nrm;
    dv *= amp / nrm;
    const auto r = bounded_perturbation_run(wave, du, dv, horizon, dt, every);
    doc["amplitude"] = amp;
    doc["horizon"] = horizon;
    doc["max_ratio"] = r.max_ratio;
    doc["invariant_drift"] = r.invariant_drift;
    doc["times"] = r.times;
    doc["orbital_distances"] = r.distances;
  } else {
    throw UsageError("unknown evolve mode '" + mode + "' (traveling, growth, bounded)");
  }

  if (e.value("snapshots", false) && mode == "traveling") {
    if (out.empty()) throw UsageError("--snapshots needs --out");
    std::ofstream bin(out + ".bin", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(final_state.u.data()),
              static_cast<std::streamsize>(sizeof(double) * final_state.u.size()));
    bin.write(reinterpret_cast<const char*>(final_state.v.data()),
              static_cast<std::streamsize>(sizeof(double) * final_state.v.size()));
    const std::uint16_t probe = 1;
    const bool little = *reinterpret_cast<const unsigned char*>(&probe) == 1;
    json side = header("evolve-snapshot", cfg);
    side["fields"] = {"u", "v"};
    side["dtype"] = "float64";
    side["endianness"] = little ? "little" : "big";
    side["N"] = wave.N;
    side["half_period"] = wave.L;
    side["t"] = final_state.t;
    side["dt"] = dt;
    write_file(out + ".bin.json", side.dump(2) + "\n");
  }
  emit(doc, out);
  return kOk;
}

int error_exit(const std::string& kind, const std::string& message, int code,
               std::optional<double> extra = std::nullopt) {
  json err{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  if (extra) err["error"]["value"] = *extra;
  std::cout << err.dump(2) << '\n';
  return code;
}

void add_wave_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override it");
  cmd->add_option("--out", f.out, "output path prefix");
  cmd->add_option("--p", f.p, "nonlinearity exponent");
  cmd->add_option("--a", f.a, "integration constant a");
  cmd->add_option("--b", f.b, "integration constant b");
  cmd->add_option("--E", f.E, "energy level");
  cmd->add_option("--chat", f.chat, "1 - c^2");
  cmd->add_option("--csign", f.csign, "sign of the wavespeed (+1 or -1)");
  cmd->add_option("--well-hint", f.well_hint, "a point inside the desired potential well");
  cmd->add_option("--N", f.N, "grid size (even, >= 32)");
  cmd->add_option("--tol", f.tol_overrides, "tolerance override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instability index workbench for periodic waves of the good Boussinesq equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GBSTAB_VERSION);
  Flags f;

  auto* profile = app.add_subcommand("profile", "construct and sample a periodic wave");
  auto* index = app.add_subcommand("index", "closed-form instability index");
  auto* spectrum = app.add_subcommand("spectrum", "direct pencil spectrum with Krein signatures");
  auto* verify = app.add_subcommand("verify", "compare formula and direct counts");
  auto* scan = app.add_subcommand("scan", "scan the (a, E) plane");
  auto* evolve = app.add_subcommand("evolve", "time integration experiments");
  for (auto* cmd : {profile, index, spectrum, verify, scan, evolve}) add_wave_flags(cmd, f);
  for (auto* cmd : {profile, index, spectrum, verify, evolve}) {
    cmd->add_flag("--constant", f.constant, "use the constant state at the well center");
    cmd->add_option("--L", f.L, "half-period for --constant");
  }
  scan->add_option("--a-min", f.a_min);
  scan->add_option("--a-max", f.a_max);
  scan->add_option("--E-min", f.E_min);
  scan->add_option("--E-max", f.E_max);
  scan->add_option("--resolution", f.resolution, "nodes per axis");
  scan->add_option("--workers", f.workers, "worker threads");
  scan->add_option("--well", f.well_from_right, "well index counted from the right");
  evolve->add_option("--mode", f.mode, "traveling | growth | bounded");
  evolve->add_option("--horizon", f.horizon);
  evolve->add_option("--dt", f.dt);
  evolve->add_option("--amplitude", f.amplitude);
  evolve->add_option("--sample-every", f.sample_every);
  evolve->add_flag("--snapshots", f.snapshots, "write the final fields as flat binary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string name;
  for (auto* cmd : app.get_subcommands()) name = cmd->get_name();
  try {
    const json cfg = effective_config(name, f);
    if (name == "profile") return cmd_profile(cfg, f.out);
    if (name == "index") return cmd_index(cfg, f.out);
    if (name == "spectrum") return cmd_spectrum(cfg, f.out);
    if (name == "verify") return cmd_verify(cfg, f.out);
    if (name == "scan") return cmd_scan(cfg, f.out);
    if (name == "evolve") return cmd_evolve(cfg, f.out);
    return error_exit("Usage", "unknown command", kUsage);
  } catch (const UsageError& e) {
    return error_exit("Usage", e.what(), kUsage);
  } catch (const InvalidArgument& e) {
    return error_exit(e.kind(), e.what(), kUsage);
  } catch (const NonexistenceError& e) {
    return error_exit(e.kind(), e.what(), kNonexistence);
  } catch (const DegenerateOrbitError& e) {
    return error_exit(e.kind(), e.what(), kNonexistence);
  } catch (const DegenerateKernelError& e) {
    return error_exit(e.kind(), e.what(), kNonexistence);
  } catch (const NearDegenerateError& e) {
    return error_exit(e.kind(), e.what(), kNonexistence);
  } catch (const AccuracyError& e) {
    return error_exit(e.kind(), e.what(), kNumeric, e.achieved());
  } catch (const BlowupError& e) {
    return error_exit(e.kind(), e.what(), kNumeric, e.time());
  } catch (const Error& e) {
    return error_exit(e.kind(), e.what(), kNumeric);
  } catch (const json::exception& e) {
    return error_exit("Usage", std::string("bad config value: ") + e.what(), kUsage);
  } catch (const std::exception& e) {
    return error_exit("Internal", e.what(), kNumeric);
  }
}
