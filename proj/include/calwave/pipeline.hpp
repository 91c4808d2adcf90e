#pragma once

#include <vector>

#include "calwave/caloric_gauge.hpp"
#include "calwave/wave_dynamics.hpp"

namespace calwave {

/// Radial S^2-valued wave map on H^d feeding the caloric gauge suite.
///
/// Initial data is a twisted bump around the north pole,
///   u0 = (sin phi cos beta, sin phi sin beta, cos phi),
///   phi = amplitude * b(r), beta = twist * r^2 / R^2, b = exp(-r^2 / R^2),
/// with velocity `velocity * b(r)` along the twist direction.
struct PipelineConfig {
  int d = 4;
  double r_max = 8.0;
  double h = 0.1;
  double rho = 1.189207115002721;  ///< 2^(1/4)
  double s_min = 0.0;              ///< 0 selects h^2 / 4
  double s_max = 12.0;
  double amplitude = 0.004;
  double twist = 1.0;
  double velocity = 0.004;
  double bump_radius = 1.25;
  int slices = 5;
  HeatScheme scheme = HeatScheme::explicit_rk4;
  /// Angle of a fixed rotation applied to the limiting frame.
  double gauge_rotation = 0.0;
  /// Curvature shift in the psi_r heat equation; negative selects d - 1.
  double shift = -1.0;
  /// Evaluate the S(I) sample of psi_s (costs one smoothing per level).
  bool norm_sample = true;
};

/// Joint refinement: h / 2^level and log(rho) / 2^level.
PipelineConfig refine(const PipelineConfig& base, int level);

struct PipelineResult {
  ResidualReport residuals;
  /// "S_sup", "S_l2", "max_abs_A_s", "orthonormality", "tangency",
  /// "reorthonormalizations", "max_raw_symmetric", "tension_consistency".
  NormReport norms;
  std::vector<double> slice_times;
  /// Gauge data of the three window slices, centre in the middle.
  std::vector<GaugeData> window;
};

PipelineResult run_coupled_pipeline(const PipelineConfig& config);

/// The twisted-bump data of `config` sampled on `grid`.
ExtrinsicWaveState pipeline_initial_data(const PipelineConfig& config, GridPtr grid);

/// Discretized S(I) norm of psi_s over the window: per level the
/// L^2_t L^8_x, smoothed time-derivative and L^inf_t energy pieces, then
/// sup and L^2(ds/s) over positive levels.
NormReport s_norm_sample(const std::vector<GaugeData>& window, double dt, int smoothing_steps = 16);

}  // namespace calwave
