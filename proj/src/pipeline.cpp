#include "calwave/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "calwave/error.hpp"
#include "calwave/linear_dispersion.hpp"

namespace calwave {

namespace {

void validate(const PipelineConfig& c) {
  if (c.d < 2) throw Error(ErrorKind::unsupported_dimension, "need d >= 2", "d");
  if (!(c.h > 0.0) || !(c.r_max > c.h)) throw Error(ErrorKind::invalid_parameter, "need 0 < h < r_max", "h");
  if (!(c.rho > 1.0)) throw Error(ErrorKind::invalid_parameter, "rho must exceed 1", "rho");
  if (c.slices < 5) throw Error(ErrorKind::invalid_parameter, "the window needs five time slices", "slices");
  if (!(c.bump_radius > 0.0) || 6.0 * c.bump_radius >= c.r_max)
    throw Error(ErrorKind::invalid_parameter, "bump must decay well inside the grid", "bump_radius");
}

double bump(double r, double radius) { return std::exp(-(r * r) / (radius * radius)); }

}  // namespace

ExtrinsicWaveState pipeline_initial_data(const PipelineConfig& c, GridPtr grid) {
  const std::size_t n = grid->size();
  std::vector<Vec> nodes(n);
  const Vec north = Vec::Unit(3, 2);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = grid->nodes[j];
    const double b = bump(r, c.bump_radius);
    const double phi = c.amplitude * b;
    const double beta = c.twist * r * r / (c.bump_radius * c.bump_radius);
    Vec u(3);
    u << std::sin(phi) * std::cos(beta), std::sin(phi) * std::sin(beta), std::cos(phi);
    nodes[j] = u;
  }
  ExtrinsicWaveState s;
  s.position = make_map_state(grid, 2, 0, nodes, north);
  s.velocity.assign(s.position.values.size(), 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double r = grid->nodes[j];
    const double beta = c.twist * r * r / (c.bump_radius * c.bump_radius);
    const double speed = c.velocity * bump(r, c.bump_radius);
    s.velocity[0 * n + j] = -speed * std::sin(beta);
    s.velocity[1 * n + j] = speed * std::cos(beta);
  }
  return s;
}

namespace {

Mat planar_rotation(int dim, double angle) {
  Mat b = Mat::Identity(dim, dim);
  b(0, 0) = std::cos(angle);
  b(0, 1) = -std::sin(angle);
  b(1, 0) = std::sin(angle);
  b(1, 1) = std::cos(angle);
  return b;
}

void merge(ResidualReport& into, const ResidualReport& from) {
  for (const auto& [k, v] : from.entries) into.entries[k] = v;
  for (const auto& [k, v] : from.parameters) into.parameters[k] = v;
}

ScalarField node_norms(const NodeField& f) {
  ScalarField out{std::vector<double>(static_cast<std::size_t>(f.cols())), Parity::even};
  for (Eigen::Index j = 0; j < f.cols(); ++j) out.values[static_cast<std::size_t>(j)] = f.col(j).norm();
  return out;
}

NodeField smooth_rows(const RadialGrid& g, const NodeField& f, double s, int steps) {
  NodeField out(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    ScalarField row{std::vector<double>(static_cast<std::size_t>(f.cols())), Parity::even};
    for (Eigen::Index j = 0; j < f.cols(); ++j) row.values[static_cast<std::size_t>(j)] = f(r, j);
    const auto sm = heat_semigroup(g, row, s, steps);
    for (Eigen::Index j = 0; j < f.cols(); ++j) out(r, j) = sm.values[static_cast<std::size_t>(j)];
  }
  return out;
}

NodeField derivative_rows(const RadialGrid& g, const NodeField& f) {
  NodeField out(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    ScalarField row{std::vector<double>(static_cast<std::size_t>(f.cols())), Parity::even};
    for (Eigen::Index j = 0; j < f.cols(); ++j) row.values[static_cast<std::size_t>(j)] = f(r, j);
    const auto d = radial_derivative(g, row);
    for (Eigen::Index j = 0; j < f.cols(); ++j) out(r, j) = d.values[static_cast<std::size_t>(j)];
  }
  return out;
}

double max_abs(const std::vector<NodeField>& f) {
  double m = 0.0;
  for (const auto& x : f) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

PipelineConfig refine(const PipelineConfig& base, int level) {
  PipelineConfig c = base;
  const double f = std::ldexp(1.0, -level);
  c.h = base.h * f;
  c.rho = std::exp(std::log(base.rho) * f);
  c.s_min = base.s_min > 0.0 ? base.s_min * f * f : 0.0;
  return c;
}

NormReport s_norm_sample(const std::vector<GaugeData>& window, double dt, int smoothing_steps) {
  NormReport rep;
  if (window.empty()) return rep;
  const RadialGrid& g = *window.front().grid;
  const auto& s = window.front().s_levels;
  double sup = 0.0, l2 = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double sk = s[k];
    double lp_time = 0.0, smooth_time = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const GaugeData& gd = window[i];
      const double wt = (i == 0 || i + 1 == window.size()) ? 0.5 * dt : dt;
      const double a = lp_norm(g, node_norms(gd.psi_s[k]), 8.0);
      lp_time += wt * a * a;
      if (gd.has_time) {
        // (-Lap)^{-1/2} replaced by s^{1/2} e^{s Lap}.
        const double b = std::sqrt(sk) * lp_norm(g, node_norms(smooth_rows(g, gd.dt_psi_s[k], sk, smoothing_steps)), 8.0);
        smooth_time += wt * b * b;
        const ScalarField dt_norm = node_norms(gd.dt_psi_s[k]);
        const ScalarField dr_norm = node_norms(derivative_rows(g, gd.psi_s[k]));
        const double e = weighted_inner(g, dt_norm.values, dt_norm.values) +
                         weighted_inner(g, dr_norm.values, dr_norm.values);
        energy = std::max(energy, std::sqrt(e));
      }
    }
    const double value = std::sqrt(sk) * (std::sqrt(lp_time) + std::sqrt(smooth_time) + energy);
    sup = std::max(sup, value);
    const double ratio = s[k - 1] > 0.0 ? s[k] / s[k - 1] : s[std::min(k + 1, s.size() - 1)] / sk;
    l2 += std::log(ratio) * value * value;
  }
  rep.set("S_sup", sup);
  rep.set("S_l2", std::sqrt(l2));
  return rep;
}

PipelineResult run_coupled_pipeline(const PipelineConfig& config) {
  validate(config);
  const int n = static_cast<int>(std::lround(config.r_max / config.h));
  const GridPtr grid = make_grid(config.d, n * config.h, n);
  const double s_min = config.s_min > 0.0 ? config.s_min : 0.25 * config.h * config.h;

  // One leapfrog step of h / 2 between slices.
  const double slice_dt = 0.5 * config.h;
  std::vector<ExtrinsicWaveState> states;
  states.push_back(pipeline_initial_data(config, grid));
  for (int i = 1; i < config.slices; ++i) states.push_back(step_wave(states.back(), slice_dt));

  const Vec u_inf = Vec::Unit(3, 2);
  Mat e_inf = default_limit_frame(u_inf);
  if (config.gauge_rotation != 0.0) e_inf = e_inf * planar_rotation(2, config.gauge_rotation);

  std::vector<CaloricSlice> slices(states.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    try {
      CaloricSlice sl;
      sl.res = run_heat_resolution(states[i].position, s_min, config.s_max, config.rho, config.scheme);
      const FrameField raw = transport_frame(sl.res, initial_frame(sl.res.states.front()));
      sl.frames = apply_limiting_gauge(raw, sl.res, e_inf);
      slices[i] = std::move(sl);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  PipelineResult out;
  for (const auto& st : states) out.slice_times.push_back(st.time);
  const std::size_t mid = states.size() / 2;
  for (std::size_t i = mid - 1; i <= mid + 1; ++i)
    out.window.push_back(compute_gauge_data(slices[i], &slices[i - 1], &slices[i + 1], slice_dt));

  const GaugeWindow window{out.window[0], out.window[1], out.window[2], slice_dt};
  const double shift = config.shift < 0.0 ? config.d - 1.0 : config.shift;
  merge(out.residuals, verify_reconstruction(out.window[1]));
  merge(out.residuals, verify_structure(window));
  merge(out.residuals, dynamic_residuals(window, shift));
  out.residuals.parameters["rho"] = config.rho;
  out.residuals.parameters["amplitude"] = config.amplitude;

  double a_s = 0.0, raw_sym = 0.0, consistency = 0.0, ortho = 0.0, tangency = 0.0;
  double repairs = 0.0;
  for (const auto& gd : out.window) {
    a_s = std::max(a_s, max_abs(gd.A_s));
    raw_sym = std::max(raw_sym, gd.max_raw_symmetric);
    consistency = std::max(consistency, gd.tension_consistency);
  }
  for (const auto& sl : slices) {
    ortho = std::max(ortho, orthonormality_error(sl.frames));
    tangency = std::max(tangency, tangency_error(sl.frames, sl.res));
    repairs += sl.frames.reorthonormalizations;
  }
  if (config.norm_sample) {
    const NormReport s_norm = s_norm_sample(out.window, slice_dt);
    for (const auto& [k, v] : s_norm.entries()) out.norms.set(k, v);
  }
  out.norms.set("max_abs_A_s", a_s);
  out.norms.set("max_raw_symmetric", raw_sym);
  out.norms.set("tension_consistency", consistency);
  out.norms.set("orthonormality", ortho);
  out.norms.set("tangency", tangency);
  out.norms.set("reorthonormalizations", repairs);
  return out;
}

}  // namespace calwave
