#pragma once

#include <vector>

#include "calwave/geometry.hpp"
#include "calwave/targets.hpp"

namespace calwave {

/// Map from the radial grid into S^n, stored component-major:
/// `values[c * N + j]` is ambient component c at node j.
///
/// `winding` selects the symmetry class. With winding 0 the map depends on
/// r only. With winding 1 the map is u(r, theta) = R(theta) u(r) where
/// R(theta) rotates the first two ambient axes; components 0 and 1 are then
/// odd in r and pick up the angular term of the Laplacian.
struct ExtrinsicMapState {
  GridPtr grid;
  int target_dim = 2;
  int winding = 0;
  std::vector<double> values;
  std::vector<double> u_infty;

  std::size_t nodes() const { return grid->size(); }
  int ambient() const { return target_dim + 1; }
  double at(int c, std::size_t j) const { return values[static_cast<std::size_t>(c) * nodes() + j]; }
  Vec node(std::size_t j) const;
  void set_node(std::size_t j, const Vec& v);
};

/// Odd polar angle for 1-equivariant maps; the outer node carries psi_infty.
struct EquivariantProfile {
  GridPtr grid;
  ScalarField psi{{}, Parity::odd};
  double psi_infty = 0.0;
};

enum class HeatScheme { explicit_rk4, imex };

struct HeatResolution {
  std::vector<double> s_levels;
  std::vector<ExtrinsicMapState> states;
  std::vector<std::vector<double>> tension;
  std::vector<int> substeps;
  HeatScheme scheme = HeatScheme::explicit_rk4;
  double rho = 0.0;

  const RadialGrid& grid() const { return *states.front().grid; }
  std::size_t levels() const { return s_levels.size(); }
};

ExtrinsicMapState make_map_state(GridPtr grid, int target_dim, int winding,
                                 const std::vector<Vec>& node_values, const Vec& u_infty);

/// Ambient Laplacian of every component, honoring the winding.
std::vector<double> ambient_laplacian(const ExtrinsicMapState& state,
                                      const std::vector<double>& comps);
/// Radial derivative of every component, honoring the parities.
std::vector<double> ambient_radial_derivative(const ExtrinsicMapState& state,
                                              const std::vector<double>& comps);
/// |grad u|^2 per node including the angular part for winding one.
std::vector<double> gradient_density(const ExtrinsicMapState& state);

std::vector<double> heat_rhs_extrinsic(const ExtrinsicMapState& state);
/// Tangential part of heat_rhs_extrinsic: the velocity of the projected flow.
std::vector<double> heat_tension(const ExtrinsicMapState& state);
ScalarField heat_rhs_equivariant(const EquivariantProfile& p, const PolarTarget& target);

/// Largest admissible step: explicit RK4 needs ds <= 2.5 / lambda_max with
/// lambda_max the Gershgorin bound of the radial operators (about 0.55 h^2
/// for d <= 4); IMEX needs ds * max |grad u|^2 <= 0.5.
double max_heat_step(const ExtrinsicMapState& state, HeatScheme scheme);
double max_heat_step(const EquivariantProfile& p, const PolarTarget& target, HeatScheme scheme);

ExtrinsicMapState step_heat(const ExtrinsicMapState& state, double ds, HeatScheme scheme);
EquivariantProfile step_heat(const EquivariantProfile& p, const PolarTarget& target, double ds,
                             HeatScheme scheme);

/// Ladder {0} followed by s_min * rho^k up to the first level >= s_max.
std::vector<double> heat_ladder(double s_min, double s_max, double rho);

HeatResolution run_heat_resolution(const ExtrinsicMapState& initial, double s_min, double s_max,
                                   double rho, HeatScheme scheme = HeatScheme::explicit_rk4);

NormReport smoothing_report(const HeatResolution& res);

double constraint_violation(const ExtrinsicMapState& state);

/// Half the discrete Dirichlet energy summed over components.
double dirichlet_energy(const ExtrinsicMapState& state);

/// ||du||_{H^1}: L2 norms of the gradient and of the Hessian (radial and
/// angular eigen-directions), combined in quadrature.
double gradient_h1_norm(const ExtrinsicMapState& state);

}  // namespace calwave
