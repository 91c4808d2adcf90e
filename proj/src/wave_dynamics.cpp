#include "calwave/wave_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "calwave/error.hpp"

namespace calwave {

namespace {

constexpr double kCfl = 0.5;
constexpr double kTangencyTol = 1e-8;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_step(const RadialGrid& g, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::invalid_parameter, "step must be positive", "dt");
  if (dt > max_wave_step(g) * (1.0 + 1e-12))
    throw Error(ErrorKind::stability_refused, "time step violates the CFL bound dt <= 0.5 h", "dt");
}

// Delta u + |grad u|^2 u, zero at the pinned outer node.
std::vector<double> static_force(const ExtrinsicMapState& s) { return heat_rhs_extrinsic(s); }

std::vector<double> acceleration(const ExtrinsicMapState& s, const std::vector<double>& v) {
  auto out = static_force(s);
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double v2 = 0.0;
    for (int c = 0; c < s.ambient(); ++c) v2 += v[c * n + j] * v[c * n + j];
    for (int c = 0; c < s.ambient(); ++c) out[c * n + j] -= v2 * s.values[c * n + j];
  }
  return out;
}

void normalize_nodes(ExtrinsicMapState& s) {
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (int c = 0; c < s.ambient(); ++c) norm2 += s.values[c * n + j] * s.values[c * n + j];
    const double inv = 1.0 / std::sqrt(norm2);
    for (int c = 0; c < s.ambient(); ++c) s.values[c * n + j] *= inv;
  }
}

void make_tangent(const ExtrinsicMapState& s, std::vector<double>& v) {
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (int c = 0; c < s.ambient(); ++c) dot += v[c * n + j] * s.values[c * n + j];
    for (int c = 0; c < s.ambient(); ++c) v[c * n + j] -= dot * s.values[c * n + j];
  }
}

ScalarField equivariant_acceleration(const EquivariantProfile& p, const PolarTarget& target) {
  // The same operator as the heat flow; only the time order differs.
  return heat_rhs_equivariant(p, target);
}

}  // namespace

double max_wave_step(const RadialGrid& g) { return kCfl * g.h; }

ScalarField wave_rhs_equivariant(const EquivariantProfile& p, const PolarTarget& target) {
  if (p.grid->d != 2)
    throw Error(ErrorKind::unsupported_dimension, "the equivariant wave equation is written for d = 2", "d");
  return equivariant_acceleration(p, target);
}

std::vector<double> wave_rhs_extrinsic(const ExtrinsicMapState& s, const std::vector<double>& v) {
  if (v.size() != s.values.size())
    throw Error(ErrorKind::invalid_configuration, "velocity length does not match the state", "velocity");
  const std::size_t n = s.nodes();
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0, v2 = 0.0;
    for (int c = 0; c < s.ambient(); ++c) {
      dot += v[c * n + j] * s.values[c * n + j];
      v2 += v[c * n + j] * v[c * n + j];
    }
    if (std::abs(dot) > kTangencyTol * (1.0 + std::sqrt(v2)))
      throw Error(ErrorKind::tangency_violation, "velocity is not tangent to the sphere", "velocity");
  }
  return acceleration(s, v);
}

ExtrinsicWaveState step_wave(const ExtrinsicWaveState& s, double dt, bool project) {
  const RadialGrid& g = *s.position.grid;
  check_step(g, dt);
  const std::size_t n = s.position.nodes();
  const int m = s.position.ambient();

  const auto a0 = acceleration(s.position, s.velocity);
  std::vector<double> half(s.velocity.size());
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = s.velocity[i] + 0.5 * dt * a0[i];

  ExtrinsicWaveState next = s;
  for (std::size_t i = 0; i < half.size(); ++i) next.position.values[i] += dt * half[i];
  for (int c = 0; c < m; ++c) next.position.values[c * n + n - 1] = s.position.u_infty[c];
  if (project) normalize_nodes(next.position);

  // Closing kick v = b - c u with c = (dt/2)|v|^2, solved per node.
  const auto f1 = static_force(next.position);
  for (std::size_t j = 0; j < n; ++j) {
    double b2 = 0.0, beta = 0.0, mu = 0.0;
    for (int c = 0; c < m; ++c) {
      const double b = half[c * n + j] + 0.5 * dt * f1[c * n + j];
      const double u = next.position.values[c * n + j];
      next.velocity[c * n + j] = b;
      b2 += b * b;
      beta += b * u;
      mu += u * u;
    }
    if (j + 1 == n) {
      for (int c = 0; c < m; ++c) next.velocity[c * n + j] = 0.0;
      continue;
    }
    const double lin = 1.0 + dt * beta;
    const double disc = lin * lin - dt * dt * mu * b2;
    if (!(disc >= 0.0) || !(lin > 0.0))
      throw Error(ErrorKind::divergence, "velocity update has no real solution", "dt");
    const double coef = dt * b2 / (lin + std::sqrt(disc));
    for (int c = 0; c < m; ++c) next.velocity[c * n + j] -= coef * next.position.values[c * n + j];
  }
  if (project) make_tangent(next.position, next.velocity);
  if (!all_finite(next.position.values) || !all_finite(next.velocity))
    throw Error(ErrorKind::divergence, "non-finite wave state", "dt");
  next.time = s.time + dt;
  return next;
}

EquivariantWaveState step_wave(const EquivariantWaveState& s, double dt) {
  const RadialGrid& g = *s.position.grid;
  check_step(g, dt);
  EquivariantWaveState next = s;
  auto& psi = next.position.psi.values;
  auto& vel = next.velocity.values;
  const auto a0 = wave_rhs_equivariant(s.position, s.target).values;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    vel[j] += 0.5 * dt * a0[j];
    psi[j] += dt * vel[j];
  }
  psi.back() = s.position.psi_infty;
  const auto a1 = equivariant_acceleration(next.position, s.target).values;
  for (std::size_t j = 0; j < psi.size(); ++j) vel[j] += 0.5 * dt * a1[j];
  vel.back() = 0.0;
  if (!all_finite(psi) || !all_finite(vel)) throw Error(ErrorKind::divergence, "non-finite wave state", "dt");
  next.time = s.time + dt;
  return next;
}

double conserved_energy(const ExtrinsicWaveState& s) {
  const RadialGrid& g = *s.position.grid;
  const std::size_t n = s.position.nodes();
  double kin = 0.0;
  for (int c = 0; c < s.position.ambient(); ++c)
    for (std::size_t j = 0; j < n; ++j) kin += g.weights[j] * s.velocity[c * n + j] * s.velocity[c * n + j];
  return dirichlet_energy(s.position) + 0.5 * kin;
}

double conserved_energy(const EquivariantWaveState& s) {
  return equivariant_energy(*s.position.grid, s.position.psi.values, s.velocity.values, s.target);
}

EquivariantWaveState soliton_state(GridPtr grid, const HarmonicProfile& p) {
  validate_profile(p);
  EquivariantWaveState s;
  s.target = target_of(p.family);
  s.position.grid = grid;
  s.position.psi = sample_field(*grid, Parity::odd, [&](double r) { return harmonic_profile(p, r); });
  s.position.psi_infty = s.position.psi.values.back();
  s.velocity = ScalarField{std::vector<double>(grid->size(), 0.0), Parity::odd};
  return s;
}

EquivariantWaveState evolve(EquivariantWaveState s, double T, double dt) {
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  const double step = T / steps;
  for (int i = 0; i < steps; ++i) s = step_wave(s, step);
  return s;
}

ExtrinsicWaveState evolve(ExtrinsicWaveState s, double T, double dt, bool project) {
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  const double step = T / steps;
  for (int i = 0; i < steps; ++i) s = step_wave(s, step, project);
  return s;
}

double compact_bump(double r, double center, double width) {
  const double x = (r - center) / width;
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return q * q * q;
}

Trajectory perturbation_probe(ProfileFamily family, double lambda, double amplitude, double T,
                              const ProbeSettings& settings) {
  const HarmonicProfile prof{family, lambda};
  validate_profile(prof);
  if (!(T > 0.0)) throw Error(ErrorKind::invalid_parameter, "T must be positive", "T");
  if (settings.bump_center - settings.bump_width < 0.0)
    throw Error(ErrorKind::invalid_parameter, "perturbation must vanish at the origin", "bump_center");
  const double r_max = T + settings.r_extra;
  const int n = static_cast<int>(std::lround(r_max / settings.h));
  const GridPtr grid = make_grid(2, r_max, n);

  EquivariantWaveState reference = soliton_state(grid, prof);
  EquivariantWaveState s = reference;
  for (std::size_t j = 0; j < grid->size(); ++j)
    s.position.psi.values[j] += amplitude * compact_bump(grid->nodes[j], settings.bump_center, settings.bump_width);

  auto diagnose = [&](const EquivariantWaveState& st) {
    NormReport rep;
    const double h = grid->h;
    double local = 0.0, sup = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < grid->size(); ++j) {
      const double r = grid->nodes[j];
      const double dev = st.position.psi.values[j] - reference.position.psi.values[j];
      sup = std::max(sup, std::abs(dev));
      if (r <= 1.0 + 1e-12) {
        const double grad = (dev - prev) / h;
        const double vel = st.velocity.values[j] - reference.velocity.values[j];
        local += h * (std::sinh(r) * vel * vel + std::sinh(r - 0.5 * h) * grad * grad);
      }
      prev = dev;
    }
    rep.set("local_energy", local);
    rep.set("energy", conserved_energy(st));
    rep.set("boundary_value", std::abs(st.position.psi.values.back()));
    rep.set("sup_deviation", sup);
    return rep;
  };

  Trajectory traj;
  traj.samples.push_back({0.0, diagnose(s)});
  const double dt = max_wave_step(*grid);
  const int per_sample = std::max(1, static_cast<int>(std::lround(settings.sample_every / dt)));
  const int total = static_cast<int>(std::ceil(T / dt - 1e-9));
  for (int i = 1; i <= total; ++i) {
    s = step_wave(s, dt);
    reference = step_wave(reference, dt);
    if (i % per_sample == 0 || i == total) traj.samples.push_back({s.time, diagnose(s)});
  }
  return traj;
}

}  // namespace calwave
