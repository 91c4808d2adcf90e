#pragma once

#include <vector>

#include "calwave/heat_flow.hpp"

namespace calwave {

struct ExtrinsicWaveState {
  ExtrinsicMapState position;
  /// dt u, component-major like the position; tangent at every node.
  std::vector<double> velocity;
  double time = 0.0;
};

struct EquivariantWaveState {
  EquivariantProfile position;
  ScalarField velocity{{}, Parity::odd};
  double time = 0.0;
  PolarTarget target;
};

struct TrajectorySample {
  double time = 0.0;
  NormReport diagnostics;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

ScalarField wave_rhs_equivariant(const EquivariantProfile& p, const PolarTarget& target);
std::vector<double> wave_rhs_extrinsic(const ExtrinsicMapState& state, const std::vector<double>& velocity);

/// Largest leapfrog step, 0.5 h.
double max_wave_step(const RadialGrid& grid);

/// Kick-drift-kick leapfrog. For the extrinsic path the closing half kick
/// is solved exactly for the velocity-dependent normal force, which keeps
/// the step time-reversible; with `project` the position is renormalized
/// and the velocity made tangent afterwards.
ExtrinsicWaveState step_wave(const ExtrinsicWaveState& s, double dt, bool project = true);
EquivariantWaveState step_wave(const EquivariantWaveState& s, double dt);

double conserved_energy(const ExtrinsicWaveState& s);
double conserved_energy(const EquivariantWaveState& s);

/// Equivariant data (P_lambda or Q_lambda, 0) on a d = 2 grid.
EquivariantWaveState soliton_state(GridPtr grid, const HarmonicProfile& p);

/// Evolves `s` to time T in steps of at most dt and returns the final state.
EquivariantWaveState evolve(EquivariantWaveState s, double T, double dt);
ExtrinsicWaveState evolve(ExtrinsicWaveState s, double T, double dt, bool project = true);

struct ProbeSettings {
  double r_extra = 10.0;
  double h = 0.01;
  double sample_every = 1.0;
  double bump_center = 0.5;
  double bump_width = 0.5;
};

/// Soliton plus a compactly supported bump of the given amplitude. Each
/// sample records "local_energy" (energy in r <= 1 of the difference from
/// the unperturbed discrete evolution),
/// "energy", "boundary_value" and "sup_deviation".
Trajectory perturbation_probe(ProfileFamily family, double lambda, double amplitude, double T,
                              const ProbeSettings& settings = {});

/// C^2 bump supported in |r - center| < width, peak value 1.
double compact_bump(double r, double center, double width);

}  // namespace calwave
