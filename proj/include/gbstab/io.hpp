#pragma once

// JSON conversions and the configuration hash embedded in every output file.

#include <cstdint>
#include <cstdio>
#include <string>

#include "json.hpp"

#include "gbstab/profile.hpp"
#include "gbstab/tolerances.hpp"

#define GBSTAB_VERSION "0.1.0"

namespace gbstab {

using json = nlohmann::json;

inline json to_json(const Tolerances& t) {
  return json{{"root_scan_points", t.root_scan_points},
              {"degenerate_orbit", t.degenerate_orbit},
              {"quadrature", t.quadrature},
              {"profile_residual", t.profile_residual},
              {"kernel_rel", t.kernel_rel},
              {"solvability", t.solvability},
              {"s1_floor", t.s1_floor},
              {"re_rel", t.re_rel},
              {"im_rel", t.im_rel},
              {"cluster_rel", t.cluster_rel},
              {"sign_tol", t.sign_tol},
              {"kernel_eigen_abs", t.kernel_eigen_abs},
              {"reconcile_rel", t.reconcile_rel}};
}

/// Overrides fields present in `j`; unknown keys are rejected.
inline void update_from_json(Tolerances& t, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "root_scan_points") t.root_scan_points = value.get<int>();
    else if (key == "degenerate_orbit") t.degenerate_orbit = value.get<double>();
    else if (key == "quadrature") t.quadrature = value.get<double>();
    else if (key == "profile_residual") t.profile_residual = value.get<double>();
    else if (key == "kernel_rel") t.kernel_rel = value.get<double>();
    else if (key == "solvability") t.solvability = value.get<double>();
    else if (key == "s1_floor") t.s1_floor = value.get<double>();
    else if (key == "re_rel") t.re_rel = value.get<double>();
    else if (key == "im_rel") t.im_rel = value.get<double>();
    else if (key == "cluster_rel") t.cluster_rel = value.get<double>();
    else if (key == "sign_tol") t.sign_tol = value.get<double>();
    else if (key == "kernel_eigen_abs") t.kernel_eigen_abs = value.get<double>();
    else if (key == "reconcile_rel") t.reconcile_rel = value.get<double>();
    else throw InvalidArgument("unknown tolerance key '" + key + "'");
  }
}

inline json to_json(const WaveParameters& w) {
  json j{{"p", w.p}, {"a", w.a}, {"b", w.b}, {"E", w.E}, {"chat", w.chat}, {"csign", w.csign},
         {"c", w.c()}};
  if (w.well_hint) j["well_hint"] = *w.well_hint;
  return j;
}

/// 64-bit FNV-1a of the compact JSON dump (keys are sorted by nlohmann::json).
inline std::string config_hash(const json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gbstab
