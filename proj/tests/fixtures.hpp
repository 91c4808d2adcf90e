#pragma once

#include <cmath>
#include <vector>

#include "calwave/heat_flow.hpp"
#include "calwave/targets.hpp"

namespace fixtures {

using calwave::GridPtr;
using calwave::Vec;

// Radial S^2 map phi = amp * exp(-r^2/R^2) off the north pole, twisted by
// beta = twist * r^2 / R^2.
inline calwave::ExtrinsicMapState twisted_bump(GridPtr g, double amp, double twist = 1.0, double R = 1.25) {
  std::vector<Vec> nodes;
  for (double r : g->nodes) {
    const double b = std::exp(-r * r / (R * R));
    const double phi = amp * b, beta = twist * r * r / (R * R);
    Vec u(3);
    u << std::sin(phi) * std::cos(beta), std::sin(phi) * std::sin(beta), std::cos(phi);
    nodes.push_back(u);
  }
  return calwave::make_map_state(g, 2, 0, nodes, Vec::Unit(3, 2));
}

// 1-equivariant map (sin psi cos theta, sin psi sin theta, cos psi) stored at theta = 0.
template <class Fn>
calwave::ExtrinsicMapState equatorial(GridPtr g, Fn&& psi) {
  std::vector<Vec> nodes;
  for (double r : g->nodes) {
    const double p = psi(r);
    Vec u(3);
    u << std::sin(p), 0.0, std::cos(p);
    nodes.push_back(u);
  }
  return calwave::make_map_state(g, 2, 1, nodes, nodes.back());
}

inline calwave::ExtrinsicMapState constant_map(GridPtr g) {
  std::vector<Vec> nodes(g->size(), Vec::Unit(3, 2));
  return calwave::make_map_state(g, 2, 0, nodes, Vec::Unit(3, 2));
}

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace fixtures
