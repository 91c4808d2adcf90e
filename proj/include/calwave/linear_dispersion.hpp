#pragma once

#include <vector>

#include "calwave/geometry.hpp"

namespace calwave {

struct LinearWaveState {
  GridPtr grid;
  ScalarField v;
  ScalarField v_t;
  double time = 0.0;
};

/// Sampled solution of v_tt = Lap v with v pinned to zero at r_max.
struct LinearTrajectory {
  GridPtr grid;
  std::vector<double> times;
  std::vector<ScalarField> v;
  std::vector<ScalarField> v_t;
};

struct LinearSolveOptions {
  double dt = 0.0;  ///< 0 selects the CFL limit 0.5 h
  double sample_every = 0.1;
};

LinearTrajectory solve_linear_wave(const LinearWaveState& data, double T,
                                   const LinearSolveOptions& opts = {});

/// H^3 only: evolves w = sinh(r) v under w_tt = w_rr - w and maps back.
LinearTrajectory solve_linear_wave_kg3(const LinearWaveState& data, double T,
                                       const LinearSolveOptions& opts = {});

/// sum w v_t^2 + Dirichlet form of v.
double linear_energy(const RadialGrid& grid, const ScalarField& v, const ScalarField& v_t);

struct DecayFit {
  double exponent = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least-squares slope of log ||v(t)||_{L^q} against log t over [2, T];
/// the trajectory must reach T >= 30.
DecayFit dispersive_fit(const LinearTrajectory& traj, double q);

/// Same fit restricted to samples with t in [t0, t1].
DecayFit local_decay_fit(const LinearTrajectory& traj, double q, double t0, double t1);

/// Pass q = INFINITY for the sup norm.
struct AdmissibleTriple {
  double p = 2.0;
  double q = 2.0;
  double gamma = 0.0;
};

/// Throws an inadmissible error whose key names the failed relation:
/// "p", "q", "scaling", "decay" or "endpoint".
void check_admissible(const AdmissibleTriple& t, int d);
bool is_admissible(const AdmissibleTriple& t, int d);

/// ||grad_{t,x} v||_{L^p_t W^{-gamma,q}} / ||(v0, v1)||_{H^1 x L^2}, with the
/// negative-order norm replaced by heat smoothing at scale gamma * s0
/// (a fixed number of Crank-Nicolson steps).
double strichartz_sample(const LinearTrajectory& traj, const AdmissibleTriple& triple, double s0 = 1.0);

/// e^{s Lap} f by Crank-Nicolson, r_max pinned. steps = 0 picks the
/// smallest count that keeps the scheme positivity preserving.
ScalarField heat_semigroup(const RadialGrid& grid, const ScalarField& f, double s, int steps = 0);

/// Lap with the pinned outer row, matching heat_semigroup.
ScalarField pinned_laplacian(const RadialGrid& grid, const ScalarField& f);

/// Labels "grad_p<p>" and "lap_p<p>": sup over s of
/// ||s^{1/2} grad e^{s Lap} f||_p / ||f||_p and ||s Lap e^{s Lap} f||_p / ||f||_p.
NormReport semigroup_bound_sweep(const RadialGrid& grid, const ScalarField& f,
                                 const std::vector<double>& s_grid,
                                 const std::vector<double>& exponents = {2.0, 4.0, 8.0});

struct Reconstruction {
  double residual = 0.0;
  double tail = 0.0;
};

/// Relative L^2 error of f against its heat-flow Littlewood-Paley
/// reconstruction of order k in {1, 2} over the positive geometric s_grid.
Reconstruction lp_reconstruction(const RadialGrid& grid, const ScalarField& f,
                                 const std::vector<double>& s_grid, int k = 1);

std::vector<double> geometric_grid(double s_min, double s_max, double rho);

}  // namespace calwave
