#include "calwave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "calwave/error.hpp"
#include "calwave/kernels.hpp"

namespace calwave {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_configuration: return "invalid configuration";
    case ErrorKind::invalid_parameter: return "invalid parameter";
    case ErrorKind::unsupported_order: return "unsupported order";
    case ErrorKind::unsupported_dimension: return "unsupported dimension";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::tangency_violation: return "tangency violation";
    case ErrorKind::stability_refused: return "stability refused";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::transport_instability: return "transport instability";
    case ErrorKind::orientation_mismatch: return "orientation mismatch";
    case ErrorKind::inadmissible: return "inadmissible triple";
    case ErrorKind::too_short: return "trajectory too short";
    case ErrorKind::io: return "io";
  }
  return "error";
}

double sphere_area(int d) {
  const double half = 0.5 * d;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

RadialGrid build_radial_grid(int d, double r_max, int n) {
  if (d < 2) throw Error(ErrorKind::invalid_configuration, "dimension must be at least 2", "d");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw Error(ErrorKind::invalid_configuration, "r_max must be positive", "r_max");
  if (n < 8) throw Error(ErrorKind::invalid_configuration, "need at least 8 nodes", "n");

  RadialGrid g;
  g.d = d;
  g.r_max = r_max;
  g.h = r_max / n;
  g.sphere_area = sphere_area(d);
  const auto N = static_cast<std::size_t>(n);
  const double h = g.h;
  const auto sig = [d](double r) { return std::pow(std::sinh(r), d - 1); };

  g.nodes.resize(N);
  g.weights.resize(N);
  g.coth.resize(N);
  g.inv_sinh2.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double r = h * static_cast<double>(j + 1);
    g.nodes[j] = r;
    g.weights[j] = g.sphere_area * sig(r) * h;
    g.coth[j] = 1.0 / std::tanh(r);
    const double s = std::sinh(r);
    g.inv_sinh2[j] = 1.0 / (s * s);
  }

  g.even_flux.resize(N - 1);
  double running = 0.0;
  for (std::size_t j = 0; j + 1 < N; ++j) {
    running += g.weights[j] * d * std::cosh(g.nodes[j]);
    const double jump = 2.0 * std::sinh(g.nodes[j] + 0.5 * h) * std::sinh(0.5 * h);
    g.even_flux[j] = running / jump;
  }

  g.odd_up.resize(N);
  g.odd_down.resize(N);
  for (std::size_t m = 0; m < N; ++m) {
    const double mid = sig(g.nodes[m] - 0.5 * h);
    g.odd_up[m] = sig(g.nodes[m]) / mid;
    g.odd_down[m] = m == 0 ? 0.0 : sig(g.nodes[m - 1]) / mid;
  }
  return g;
}

GridPtr make_grid(int d, double r_max, int n) {
  return std::make_shared<const RadialGrid>(build_radial_grid(d, r_max, n));
}

namespace {

void check_shape(const RadialGrid& grid, const ScalarField& f) {
  if (f.values.size() != grid.size())
    throw Error(ErrorKind::invalid_configuration, "field length does not match the grid", "values");
}

double origin_value(const std::vector<double>& v, Parity parity) {
  return parity == Parity::odd ? 0.0 : (4.0 * v[0] - v[1]) / 3.0;
}

}  // namespace

ScalarField laplacian_radial(const RadialGrid& grid, const ScalarField& f) {
  check_shape(grid, f);
  ScalarField out{std::vector<double>(grid.size()), f.parity};
  if (f.parity == Parity::even) {
    kernels::even_laplacian(grid, f.values.data(), out.values.data());
  } else {
    kernels::odd_laplacian(grid, f.values.data(), out.values.data());
    for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] += f.values[j] * grid.inv_sinh2[j];
  }
  return out;
}

ScalarField equivariant_laplacian(const RadialGrid& grid, const ScalarField& f) {
  check_shape(grid, f);
  ScalarField out{std::vector<double>(grid.size()), Parity::odd};
  kernels::odd_laplacian(grid, f.values.data(), out.values.data());
  return out;
}

ScalarField radial_derivative(const RadialGrid& grid, const ScalarField& f) {
  check_shape(grid, f);
  const std::size_t n = grid.size();
  const auto& v = f.values;
  const double h = grid.h;
  ScalarField out{std::vector<double>(n),
                  f.parity == Parity::even ? Parity::odd : Parity::even};
  out.values[0] = (v[1] - origin_value(v, f.parity)) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j) out.values[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
  out.values[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return out;
}

double weighted_inner(const RadialGrid& grid, const std::vector<double>& f,
                      const std::vector<double>& g) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) acc += grid.weights[j] * f[j] * g[j];
  return acc;
}

double lp_norm(const RadialGrid& grid, const ScalarField& f, double p) {
  check_shape(grid, f);
  if (std::isnan(p) || p < 1.0) throw Error(ErrorKind::invalid_configuration, "p must be at least 1", "p");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) acc += grid.weights[j] * std::pow(std::abs(f.values[j]), p);
  return std::pow(acc, 1.0 / p);
}

double sobolev_norm(const RadialGrid& grid, const ScalarField& f, int k) {
  if (k < 0 || k > 3) throw Error(ErrorKind::unsupported_order, "Sobolev order must lie in [0, 3]", "k");
  check_shape(grid, f);
  double total = lp_norm(grid, f, 2.0);
  ScalarField deriv = f;
  for (int l = 1; l <= k; ++l) {
    deriv = radial_derivative(grid, deriv);
    total += lp_norm(grid, deriv, 2.0);
  }
  return total;
}

double dirichlet_form(const RadialGrid& grid, const ScalarField& f) {
  check_shape(grid, f);
  const auto& v = f.values;
  double acc = 0.0;
  if (f.parity == Parity::even) {
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const double dv = v[j + 1] - v[j];
      acc += grid.even_flux[j] * dv * dv;
    }
    return acc;
  }
  const double h = grid.h;
  double prev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mid = grid.nodes[j] - 0.5 * h;
    const double dv = (v[j] - prev) / h;
    acc += grid.sphere_area * std::pow(std::sinh(mid), grid.d - 1) * h * dv * dv;
    prev = v[j];
  }
  return acc;
}

double rayleigh_quotient(const RadialGrid& grid, const ScalarField& f) {
  check_shape(grid, f);
  const double mass = weighted_inner(grid, f.values, f.values);
  if (!(mass > 0.0)) throw Error(ErrorKind::degenerate, "Rayleigh quotient of the zero field", "f");
  return dirichlet_form(grid, f) / mass;
}

double stiffness_bound(const RadialGrid& g) {
  double bound = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    const double up = g.even_flux[j];
    const double down = j == 0 ? 0.0 : g.even_flux[j - 1];
    bound = std::max(bound, 2.0 * (up + down) / g.weights[j]);
    const double h2 = g.h * g.h;
    const double odd = (g.odd_up[j + 1] + g.odd_down[j + 1] + g.odd_up[j] + g.odd_down[j]) / h2 +
                       std::abs(g.d - 2) * g.inv_sinh2[j];
    bound = std::max(bound, odd);
  }
  return bound;
}

void NormReport::set(const std::string& label, double value) {
  if (!std::isfinite(value) || value < 0.0)
    throw Error(ErrorKind::invalid_parameter, "norm values must be finite and nonnegative", label);
  values_[label] = value;
}

double NormReport::at(const std::string& label) const {
  auto it = values_.find(label);
  if (it == values_.end()) throw Error(ErrorKind::invalid_parameter, "no such norm entry", label);
  return it->second;
}

}  // namespace calwave
