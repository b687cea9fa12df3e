#pragma once

namespace gbstab {

/// Every threshold used by the pipeline. The CLI exposes each field as a
/// config key; the defaults below are the documented values.
struct Tolerances {
  // profile
  int root_scan_points = 10000;
  double degenerate_orbit = 1e-8;   ///< |V'(U±)|·(U₊−U₋) cutoff, relative to the energy scale
  double quadrature = 1e-10;        ///< relative node-doubling error of the period integral
  double profile_residual = 1e-8;   ///< energy identity on the sampled grid

  // hill
  double kernel_rel = 1e-7;         ///< zero band, relative to max |eigenvalue| of L₂
  double solvability = 1e-8;
  double s1_floor = 1e-10;          ///< |⟨L₂⁻¹1,1⟩| below this refuses to classify

  // pencil
  double re_rel = 1e-6;             ///< real-part band, relative to ‖spectrum‖∞
  double im_rel = 1e-6;
  double cluster_rel = 1e-6;
  double sign_tol = 1e-8;           ///< |Krein quantity| below this is indeterminate
  double kernel_eigen_abs = 1e-5;   ///< magnitude separating the zero eigenvalues

  // index
  double reconcile_rel = 1e-6;      ///< formula scalar vs pencil scalar
};

}  // namespace gbstab
