#include "calwave/heat_flow.hpp"

#include <algorithm>
#include <cmath>

#include "calwave/error.hpp"
#include "calwave/kernels.hpp"

namespace calwave {

namespace {

constexpr double kRk4Stability = 2.5;
constexpr double kImexStability = 0.5;
constexpr double kSubstepSafety = 0.9;

Parity component_parity(const ExtrinsicMapState& s, int c) {
  return (s.winding == 1 && c < 2) ? Parity::odd : Parity::even;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void pin_boundary(ExtrinsicMapState& s) {
  const std::size_t last = s.nodes() - 1;
  for (int c = 0; c < s.ambient(); ++c) s.values[c * s.nodes() + last] = s.u_infty[c];
}

void project_all(ExtrinsicMapState& s) {
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (int c = 0; c < s.ambient(); ++c) norm2 += s.values[c * n + j] * s.values[c * n + j];
    const double inv = 1.0 / std::sqrt(norm2);
    for (int c = 0; c < s.ambient(); ++c) s.values[c * n + j] *= inv;
  }
}

// Sum of squared radial derivatives plus the angular part.
std::vector<double> gradient_density_of(const ExtrinsicMapState& s, const std::vector<double>& comps) {
  const auto deriv = ambient_radial_derivative(s, comps);
  const std::size_t n = s.nodes();
  std::vector<double> out(n, 0.0);
  for (int c = 0; c < s.ambient(); ++c)
    for (std::size_t j = 0; j < n; ++j) out[j] += deriv[c * n + j] * deriv[c * n + j];
  if (s.winding == 1) {
    for (std::size_t j = 0; j < n; ++j)
      out[j] += (comps[j] * comps[j] + comps[n + j] * comps[n + j]) * s.grid->inv_sinh2[j];
  }
  return out;
}

double field_l2_squared(const RadialGrid& g, const std::vector<double>& comps, int ambient) {
  const std::size_t n = g.size();
  double acc = 0.0;
  for (int c = 0; c < ambient; ++c)
    for (std::size_t j = 0; j < n; ++j) acc += g.weights[j] * comps[c * n + j] * comps[c * n + j];
  return acc;
}

std::vector<double> tangential_part(const ExtrinsicMapState& s, std::vector<double> v) {
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (int c = 0; c < s.ambient(); ++c) dot += v[c * n + j] * s.values[c * n + j];
    for (int c = 0; c < s.ambient(); ++c) v[c * n + j] -= dot * s.values[c * n + j];
  }
  return v;
}

void check_state(const ExtrinsicMapState& s) {
  if (!s.grid) throw Error(ErrorKind::invalid_configuration, "state has no grid", "grid");
  if (s.values.size() != s.nodes() * static_cast<std::size_t>(s.ambient()))
    throw Error(ErrorKind::invalid_configuration, "state length does not match the grid", "values");
}

}  // namespace

Vec ExtrinsicMapState::node(std::size_t j) const {
  Vec v(ambient());
  for (int c = 0; c < ambient(); ++c) v[c] = at(c, j);
  return v;
}

void ExtrinsicMapState::set_node(std::size_t j, const Vec& v) {
  for (int c = 0; c < ambient(); ++c) values[c * nodes() + j] = v[c];
}

ExtrinsicMapState make_map_state(GridPtr grid, int target_dim, int winding,
                                 const std::vector<Vec>& node_values, const Vec& u_infty) {
  if (!grid) throw Error(ErrorKind::invalid_configuration, "missing grid", "grid");
  if (target_dim < 1) throw Error(ErrorKind::invalid_parameter, "sphere dimension must be at least 1", "n");
  if (winding != 0 && winding != 1)
    throw Error(ErrorKind::invalid_parameter, "winding must be 0 or 1", "winding");
  if (winding == 1 && (grid->d != 2 || target_dim < 2))
    throw Error(ErrorKind::unsupported_dimension, "winding one needs d = 2 and a target of dimension >= 2",
                "winding");
  if (node_values.size() != grid->size())
    throw Error(ErrorKind::invalid_configuration, "one value per node is required", "values");
  if (u_infty.size() != target_dim + 1)
    throw Error(ErrorKind::invalid_configuration, "ambient dimension mismatch", "u_infty");

  ExtrinsicMapState s;
  s.grid = std::move(grid);
  s.target_dim = target_dim;
  s.winding = winding;
  s.values.assign(s.nodes() * static_cast<std::size_t>(s.ambient()), 0.0);
  const Vec far = project_to_sphere(u_infty);
  s.u_infty.assign(far.data(), far.data() + far.size());
  for (std::size_t j = 0; j < s.nodes(); ++j) {
    if (node_values[j].size() != s.ambient())
      throw Error(ErrorKind::invalid_configuration, "ambient dimension mismatch", "values");
    s.set_node(j, project_to_sphere(node_values[j]));
  }
  pin_boundary(s);
  return s;
}

std::vector<double> ambient_laplacian(const ExtrinsicMapState& s, const std::vector<double>& comps) {
  const std::size_t n = s.nodes();
  std::vector<double> out(comps.size());
  for (int c = 0; c < s.ambient(); ++c) {
    const double* f = comps.data() + c * n;
    double* o = out.data() + c * n;
    if (component_parity(s, c) == Parity::odd) {
      kernels::odd_laplacian(*s.grid, f, o);
    } else {
      kernels::even_laplacian(*s.grid, f, o);
    }
  }
  return out;
}

std::vector<double> ambient_radial_derivative(const ExtrinsicMapState& s,
                                              const std::vector<double>& comps) {
  const std::size_t n = s.nodes();
  std::vector<double> out(comps.size());
  for (int c = 0; c < s.ambient(); ++c) {
    ScalarField f{std::vector<double>(comps.begin() + c * n, comps.begin() + (c + 1) * n),
                  component_parity(s, c)};
    const auto d = radial_derivative(*s.grid, f);
    std::copy(d.values.begin(), d.values.end(), out.begin() + c * n);
  }
  return out;
}

std::vector<double> gradient_density(const ExtrinsicMapState& s) {
  check_state(s);
  return gradient_density_of(s, s.values);
}

std::vector<double> heat_rhs_extrinsic(const ExtrinsicMapState& s) {
  check_state(s);
  auto out = ambient_laplacian(s, s.values);
  const auto dens = gradient_density_of(s, s.values);
  const std::size_t n = s.nodes();
  for (int c = 0; c < s.ambient(); ++c) {
    for (std::size_t j = 0; j + 1 < n; ++j) out[c * n + j] += dens[j] * s.values[c * n + j];
    out[c * n + n - 1] = 0.0;
  }
  return out;
}

std::vector<double> heat_tension(const ExtrinsicMapState& s) {
  return tangential_part(s, heat_rhs_extrinsic(s));
}

ScalarField heat_rhs_equivariant(const EquivariantProfile& p, const PolarTarget& target) {
  const RadialGrid& g = *p.grid;
  ScalarField out = equivariant_laplacian(g, p.psi);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double psi = p.psi.values[j];
    out.values[j] += (psi - target.force(psi)) * g.inv_sinh2[j];
  }
  out.values.back() = 0.0;
  return out;
}

double max_heat_step(const ExtrinsicMapState& s, HeatScheme scheme) {
  check_state(s);
  const auto dens = gradient_density_of(s, s.values);
  const double gmax = *std::max_element(dens.begin(), dens.end());
  if (scheme == HeatScheme::imex) return gmax > 0.0 ? kImexStability / gmax : INFINITY;
  return kRk4Stability / (stiffness_bound(*s.grid) + gmax);
}

double max_heat_step(const EquivariantProfile& p, const PolarTarget& target, HeatScheme scheme) {
  const RadialGrid& g = *p.grid;
  double react = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double psi = p.psi.values[j];
    const double dforce =
        target.kind == PolarKind::sphere ? std::cos(2.0 * psi) : std::cosh(2.0 * psi);
    react = std::max(react, std::abs(1.0 - dforce) * g.inv_sinh2[j]);
  }
  if (scheme == HeatScheme::imex) return react > 0.0 ? kImexStability / react : INFINITY;
  return kRk4Stability / (stiffness_bound(g) + react);
}

ExtrinsicMapState step_heat(const ExtrinsicMapState& s, double ds, HeatScheme scheme) {
  check_state(s);
  if (!(ds > 0.0) || !std::isfinite(ds))
    throw Error(ErrorKind::invalid_parameter, "step must be positive", "ds");
  if (ds > max_heat_step(s, scheme))
    throw Error(ErrorKind::stability_refused, "heat step exceeds the stability limit", "ds");

  ExtrinsicMapState next = s;
  const std::size_t n = s.nodes();
  if (scheme == HeatScheme::explicit_rk4) {
    auto stage = [&](const std::vector<double>& base, const std::vector<double>& k, double a) {
      ExtrinsicMapState tmp = s;
      for (std::size_t i = 0; i < base.size(); ++i) tmp.values[i] = base[i] + a * k[i];
      return heat_rhs_extrinsic(tmp);
    };
    const auto k1 = heat_rhs_extrinsic(s);
    const auto k2 = stage(s.values, k1, 0.5 * ds);
    const auto k3 = stage(s.values, k2, 0.5 * ds);
    const auto k4 = stage(s.values, k3, ds);
    for (std::size_t i = 0; i < next.values.size(); ++i)
      next.values[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  } else {
    const auto dens = gradient_density_of(s, s.values);
    for (int c = 0; c < s.ambient(); ++c) {
      std::vector<double> col(s.values.begin() + c * n, s.values.begin() + (c + 1) * n);
      for (std::size_t j = 0; j + 1 < n; ++j) col[j] += ds * dens[j] * col[j];
      const auto rows = kernels::operator_rows(*s.grid, component_parity(s, c));
      kernels::solve_shifted(rows, ds, col);
      std::copy(col.begin(), col.end(), next.values.begin() + c * n);
    }
  }
  if (!all_finite(next.values)) throw Error(ErrorKind::divergence, "non-finite heat state", "ds");
  project_all(next);
  pin_boundary(next);
  return next;
}

EquivariantProfile step_heat(const EquivariantProfile& p, const PolarTarget& target, double ds,
                             HeatScheme scheme) {
  if (!(ds > 0.0) || !std::isfinite(ds))
    throw Error(ErrorKind::invalid_parameter, "step must be positive", "ds");
  if (ds > max_heat_step(p, target, scheme))
    throw Error(ErrorKind::stability_refused, "heat step exceeds the stability limit", "ds");

  EquivariantProfile next = p;
  auto& v = next.psi.values;
  if (scheme == HeatScheme::explicit_rk4) {
    auto eval = [&](const std::vector<double>& base, const std::vector<double>* k, double a) {
      EquivariantProfile tmp = p;
      if (k) {
        for (std::size_t i = 0; i < base.size(); ++i) tmp.psi.values[i] = base[i] + a * (*k)[i];
      }
      return heat_rhs_equivariant(tmp, target).values;
    };
    const auto& b = p.psi.values;
    const auto k1 = eval(b, nullptr, 0.0);
    const auto k2 = eval(b, &k1, 0.5 * ds);
    const auto k3 = eval(b, &k2, 0.5 * ds);
    const auto k4 = eval(b, &k3, ds);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  } else {
    const RadialGrid& g = *p.grid;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
      const double psi = p.psi.values[j];
      v[j] += ds * (psi - target.force(psi)) * g.inv_sinh2[j];
    }
    kernels::solve_shifted(kernels::operator_rows(g, Parity::odd), ds, v);
  }
  if (!all_finite(v)) throw Error(ErrorKind::divergence, "non-finite heat profile", "ds");
  v.back() = p.psi_infty;
  return next;
}

std::vector<double> heat_ladder(double s_min, double s_max, double rho) {
  if (!(s_min > 0.0) || !std::isfinite(s_min))
    throw Error(ErrorKind::invalid_parameter, "s_min must be positive", "s_min");
  if (!(s_max > s_min) || !std::isfinite(s_max))
    throw Error(ErrorKind::invalid_parameter, "s_max must exceed s_min", "s_max");
  if (!(rho > 1.0 && rho <= 2.0)) throw Error(ErrorKind::invalid_parameter, "rho must lie in (1, 2]", "rho");
  std::vector<double> levels{0.0};
  for (int k = 0;; ++k) {
    const double s = s_min * std::pow(rho, k);
    levels.push_back(s);
    if (s >= s_max * (1.0 - 1e-12)) break;
  }
  return levels;
}

HeatResolution run_heat_resolution(const ExtrinsicMapState& initial, double s_min, double s_max,
                                   double rho, HeatScheme scheme) {
  check_state(initial);
  const double h = initial.grid->h;
  if (s_min > h * h * (1.0 + 1e-12))
    throw Error(ErrorKind::invalid_parameter, "s_min must resolve the parabolic scale h^2", "s_min");

  HeatResolution res;
  res.scheme = scheme;
  res.rho = rho;
  res.s_levels = heat_ladder(s_min, s_max, rho);
  res.states.reserve(res.s_levels.size());
  res.states.push_back(initial);
  pin_boundary(res.states.back());
  res.substeps.push_back(0);

  for (std::size_t k = 1; k < res.s_levels.size(); ++k) {
    ExtrinsicMapState cur = res.states.back();
    const double span = res.s_levels[k] - res.s_levels[k - 1];
    const double cap = kSubstepSafety * max_heat_step(cur, scheme);
    const int steps = std::max(1, static_cast<int>(std::ceil(span / cap)));
    const double ds = span / steps;
    try {
      for (int i = 0; i < steps; ++i) cur = step_heat(cur, ds, scheme);
    } catch (const Error& e) {
      throw DivergenceError(std::string("heat flow diverged: ") + e.what(), static_cast<int>(k) - 1);
    }
    res.states.push_back(std::move(cur));
    res.substeps.push_back(steps);
  }

  res.tension.reserve(res.states.size());
  for (const auto& st : res.states) res.tension.push_back(heat_tension(st));
  return res;
}

NormReport smoothing_report(const HeatResolution& res) {
  if (res.levels() < 3)
    throw Error(ErrorKind::invalid_parameter, "smoothing report needs at least three levels", "levels");
  const RadialGrid& g = res.grid();
  const int ambient = res.states.front().ambient();
  const double log_rho = std::log(res.rho);

  double sup_grad = 0.0, sup_lap_t = 0.0, sup_lap_u = 0.0;
  double sum_grad = 0.0, sum_lap_t = 0.0, sum_lap_u = 0.0;
  for (std::size_t k = 1; k < res.levels(); ++k) {
    const double s = res.s_levels[k];
    const auto& st = res.states[k];
    const auto& tens = res.tension[k];
    auto interior = [&](std::vector<double> f) {
      for (int c = 0; c < ambient; ++c) f[c * g.size() + g.size() - 1] = 0.0;
      return f;
    };
    const auto dens = gradient_density_of(st, tens);
    double grad2 = 0.0;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) grad2 += g.weights[j] * dens[j];
    const double a = std::sqrt(s * grad2);
    const double b = s * std::sqrt(field_l2_squared(g, interior(ambient_laplacian(st, tens)), ambient));
    const double c = std::sqrt(field_l2_squared(g, interior(ambient_laplacian(st, st.values)), ambient));
    sup_grad = std::max(sup_grad, a);
    sup_lap_t = std::max(sup_lap_t, b);
    sup_lap_u = std::max(sup_lap_u, c);
    sum_grad += a * a * log_rho;
    sum_lap_t += b * b * log_rho;
    sum_lap_u += c * c * log_rho;
  }
  NormReport rep;
  rep.set("sup_s_half_grad_tension", sup_grad);
  rep.set("sup_s_lap_tension", sup_lap_t);
  rep.set("sup_lap_u", sup_lap_u);
  rep.set("l2ds_s_half_grad_tension", std::sqrt(sum_grad));
  rep.set("l2ds_s_lap_tension", std::sqrt(sum_lap_t));
  rep.set("l2ds_lap_u", std::sqrt(sum_lap_u));
  return rep;
}

double constraint_violation(const ExtrinsicMapState& s) {
  check_state(s);
  double worst = 0.0;
  for (std::size_t j = 0; j < s.nodes(); ++j) worst = std::max(worst, std::abs(s.node(j).norm() - 1.0));
  return worst;
}

double dirichlet_energy(const ExtrinsicMapState& s) {
  check_state(s);
  const RadialGrid& g = *s.grid;
  const std::size_t n = s.nodes();
  double acc = 0.0;
  for (int c = 0; c < s.ambient(); ++c) {
    ScalarField f{std::vector<double>(s.values.begin() + c * n, s.values.begin() + (c + 1) * n),
                  component_parity(s, c)};
    acc += dirichlet_form(g, f);
  }
  if (s.winding == 1) {
    for (std::size_t j = 0; j < n; ++j)
      acc += g.weights[j] * (s.values[j] * s.values[j] + s.values[n + j] * s.values[n + j]) * g.inv_sinh2[j];
  }
  return 0.5 * acc;
}

double gradient_h1_norm(const ExtrinsicMapState& s) {
  check_state(s);
  const RadialGrid& g = *s.grid;
  const double grad2 = 2.0 * dirichlet_energy(s);
  auto lap = ambient_laplacian(s, s.values);
  for (int c = 0; c < s.ambient(); ++c) lap[c * s.nodes() + s.nodes() - 1] = 0.0;
  // Bochner on H^d: ||Hess f||^2 = ||Lap f||^2 + (d - 1) ||grad f||^2.
  const double hess2 = field_l2_squared(g, lap, s.ambient()) + (g.d - 1) * grad2;
  return std::sqrt(grad2) + std::sqrt(hess2);
}

}  // namespace calwave
