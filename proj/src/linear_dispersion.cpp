#include "calwave/linear_dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "calwave/error.hpp"
#include "calwave/kernels.hpp"

namespace calwave {

namespace {

constexpr double kAdmissibleTol = 1e-12;
constexpr double kTailLimit = 1e-6;
constexpr double kMinDecaySpan = 30.0;
constexpr double kDecayStart = 2.0;
constexpr int kSmoothingSteps = 32;

double wave_step(const RadialGrid& g, const LinearSolveOptions& o) {
  const double cap = 0.5 * g.h;
  if (o.dt == 0.0) return cap;
  if (!(o.dt > 0.0)) throw Error(ErrorKind::invalid_parameter, "dt must be positive", "dt");
  if (o.dt > cap * (1.0 + 1e-12)) throw Error(ErrorKind::stability_refused, "dt exceeds 0.5 h", "dt");
  return o.dt;
}

void check_data(const LinearWaveState& d) {
  if (!d.grid) throw Error(ErrorKind::invalid_configuration, "missing grid", "grid");
  if (d.v.values.size() != d.grid->size() || d.v_t.values.size() != d.grid->size())
    throw Error(ErrorKind::invalid_configuration, "data length does not match the grid", "values");
}

// Shared kick-drift-kick loop; `accel` writes the acceleration of `x`.
template <class Accel, class Record>
void leapfrog(std::vector<double> x, std::vector<double> v, double T, double dt, double sample_every,
              Accel&& accel, Record&& record) {
  const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
  const double step = T / steps;
  const int every = std::max(1, static_cast<int>(std::lround(sample_every / step)));
  std::vector<double> a(x.size());
  accel(x, a);
  record(0.0, x, v);
  for (int i = 1; i <= steps; ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      v[j] += 0.5 * step * a[j];
      x[j] += step * v[j];
    }
    x.back() = 0.0;
    accel(x, a);
    for (std::size_t j = 0; j < x.size(); ++j) v[j] += 0.5 * step * a[j];
    v.back() = 0.0;
    if (i % every == 0 || i == steps) record(i * step, x, v);
  }
}

void apply_rows(const kernels::Tridiagonal& t, const std::vector<double>& f, std::vector<double>& out) {
  const std::size_t n = f.size();
  for (std::size_t j = 0; j < n; ++j) {
    double acc = t.diag[j] * f[j];
    if (j > 0) acc += t.lower[j] * f[j - 1];
    if (j + 1 < n) acc += t.upper[j] * f[j + 1];
    out[j] = acc;
  }
}

}  // namespace

LinearTrajectory solve_linear_wave(const LinearWaveState& data, double T, const LinearSolveOptions& opts) {
  check_data(data);
  const RadialGrid& g = *data.grid;
  const double dt = wave_step(g, opts);
  LinearTrajectory traj;
  traj.grid = data.grid;
  const Parity par = data.v.parity;
  auto accel = [&](const std::vector<double>& x, std::vector<double>& a) {
    if (par == Parity::even) {
      kernels::even_laplacian(g, x.data(), a.data());
    } else {
      kernels::odd_laplacian(g, x.data(), a.data());
      for (std::size_t j = 0; j < x.size(); ++j) a[j] += x[j] * g.inv_sinh2[j];
    }
  };
  auto record = [&](double t, const std::vector<double>& x, const std::vector<double>& v) {
    traj.times.push_back(data.time + t);
    traj.v.push_back(ScalarField{x, par});
    traj.v_t.push_back(ScalarField{v, par});
  };
  std::vector<double> x0 = data.v.values, v0 = data.v_t.values;
  x0.back() = 0.0;
  v0.back() = 0.0;
  leapfrog(x0, v0, T, dt, opts.sample_every, accel, record);
  return traj;
}

LinearTrajectory solve_linear_wave_kg3(const LinearWaveState& data, double T, const LinearSolveOptions& opts) {
  check_data(data);
  const RadialGrid& g = *data.grid;
  if (g.d != 3) throw Error(ErrorKind::unsupported_dimension, "the sinh reduction is exact only on H^3", "d");
  const double dt = wave_step(g, opts);
  const double h2 = g.h * g.h;
  const std::size_t n = g.size();
  std::vector<double> sh(n);
  for (std::size_t j = 0; j < n; ++j) sh[j] = std::sinh(g.nodes[j]);

  LinearTrajectory traj;
  traj.grid = data.grid;
  auto accel = [&](const std::vector<double>& w, std::vector<double>& a) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double left = j == 0 ? 0.0 : w[j - 1];
      a[j] = (w[j + 1] - 2.0 * w[j] + left) / h2 - w[j];
    }
    a[n - 1] = 0.0;
  };
  auto record = [&](double t, const std::vector<double>& w, const std::vector<double>& wt) {
    ScalarField v{std::vector<double>(n), Parity::even}, vt{std::vector<double>(n), Parity::even};
    for (std::size_t j = 0; j < n; ++j) {
      v.values[j] = w[j] / sh[j];
      vt.values[j] = wt[j] / sh[j];
    }
    traj.times.push_back(data.time + t);
    traj.v.push_back(std::move(v));
    traj.v_t.push_back(std::move(vt));
  };
  std::vector<double> w0(n), wt0(n);
  for (std::size_t j = 0; j < n; ++j) {
    w0[j] = sh[j] * data.v.values[j];
    wt0[j] = sh[j] * data.v_t.values[j];
  }
  w0.back() = 0.0;
  wt0.back() = 0.0;
  leapfrog(w0, wt0, T, dt, opts.sample_every, accel, record);
  return traj;
}

double linear_energy(const RadialGrid& g, const ScalarField& v, const ScalarField& v_t) {
  return weighted_inner(g, v_t.values, v_t.values) + dirichlet_form(g, v);
}

DecayFit local_decay_fit(const LinearTrajectory& traj, double q, double t0, double t1) {
  if (!(q > 2.0)) throw Error(ErrorKind::invalid_parameter, "q must exceed 2", "q");
  const RadialGrid& g = *traj.grid;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  bool any = false;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < t0 || t > t1 || !(t > 0.0)) continue;
    const double norm = lp_norm(g, traj.v[i], q);
    if (!(norm > 0.0)) continue;
    any = true;
    const double x = std::log(t), y = std::log(norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (!any || count < 2) throw Error(ErrorKind::degenerate, "no decay to fit for vanishing data", "v");
  DecayFit fit;
  fit.points = count;
  fit.exponent = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  fit.intercept = (sy - fit.exponent * sx) / count;
  return fit;
}

DecayFit dispersive_fit(const LinearTrajectory& traj, double q) {
  if (traj.times.empty() || traj.times.back() < kMinDecaySpan)
    throw Error(ErrorKind::too_short, "trajectory must reach t = 30", "T");
  return local_decay_fit(traj, q, kDecayStart, traj.times.back());
}

void check_admissible(const AdmissibleTriple& t, int d) {
  if (!(t.p >= 2.0)) throw Error(ErrorKind::inadmissible, "p must be at least 2", "p");
  if (!(t.q >= 2.0)) throw Error(ErrorKind::inadmissible, "q must be at least 2", "q");
  const double inv_p = std::isinf(t.p) ? 0.0 : 1.0 / t.p;
  const double inv_q = std::isinf(t.q) ? 0.0 : 1.0 / t.q;
  if (std::abs(inv_p + d * inv_q - (0.5 * d - t.gamma)) > kAdmissibleTol)
    throw Error(ErrorKind::inadmissible, "1/p + d/q must equal d/2 - gamma", "scaling");
  if (inv_p + 0.5 * (d - 1) * inv_q > 0.25 * (d - 1) + kAdmissibleTol)
    throw Error(ErrorKind::inadmissible, "1/p + (d-1)/(2q) must not exceed (d-1)/4", "decay");
  if (d == 3 && t.p == 2.0 && std::isinf(t.q) && t.gamma == 1.0)
    throw Error(ErrorKind::inadmissible, "(2, inf, 1) is excluded in three dimensions", "endpoint");
}

bool is_admissible(const AdmissibleTriple& t, int d) {
  try {
    check_admissible(t, d);
    return true;
  } catch (const Error&) {
    return false;
  }
}

double strichartz_sample(const LinearTrajectory& traj, const AdmissibleTriple& triple, double s0) {
  const RadialGrid& g = *traj.grid;
  check_admissible(triple, g.d);
  if (traj.times.size() < 2) throw Error(ErrorKind::too_short, "need at least two samples", "T");
  const double data_norm = std::sqrt(linear_energy(g, traj.v.front(), traj.v_t.front()));
  if (!(data_norm > 0.0)) throw Error(ErrorKind::degenerate, "zero data has no Strichartz ratio", "v");

  const bool energy_form = triple.q == 2.0 && triple.gamma == 0.0;
  std::vector<double> profile(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (energy_form) {
      profile[i] = std::sqrt(linear_energy(g, traj.v[i], traj.v_t[i]));
      continue;
    }
    ScalarField v = traj.v[i], vt = traj.v_t[i];
    if (triple.gamma > 0.0) {
      v = heat_semigroup(g, v, triple.gamma * s0, kSmoothingSteps);
      vt = heat_semigroup(g, vt, triple.gamma * s0, kSmoothingSteps);
    }
    profile[i] = lp_norm(g, vt, triple.q) + lp_norm(g, radial_derivative(g, v), triple.q);
  }

  double num = 0.0;
  if (std::isinf(triple.p)) {
    num = *std::max_element(profile.begin(), profile.end());
  } else {
    for (std::size_t i = 1; i < profile.size(); ++i) {
      const double dt = traj.times[i] - traj.times[i - 1];
      num += 0.5 * dt * (std::pow(profile[i], triple.p) + std::pow(profile[i - 1], triple.p));
    }
    num = std::pow(num, 1.0 / triple.p);
  }
  return num / data_norm;
}

ScalarField pinned_laplacian(const RadialGrid& g, const ScalarField& f) {
  ScalarField out{std::vector<double>(g.size()), f.parity};
  apply_rows(kernels::operator_rows(g, f.parity), f.values, out.values);
  return out;
}

ScalarField heat_semigroup(const RadialGrid& g, const ScalarField& f, double s, int steps) {
  if (f.values.size() != g.size())
    throw Error(ErrorKind::invalid_configuration, "field length does not match the grid", "values");
  if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::invalid_parameter, "s must be nonnegative", "s");
  if (s == 0.0) return f;
  const auto rows = kernels::operator_rows(g, f.parity);
  if (steps <= 0) {
    double diag = 0.0;
    for (double x : rows.diag) diag = std::max(diag, std::abs(x));
    steps = std::max(1, static_cast<int>(std::ceil(s * diag / 2.0)));
  }
  const double dt = s / steps;
  ScalarField out = f;
  std::vector<double> lap(g.size());
  for (int i = 0; i < steps; ++i) {
    apply_rows(rows, out.values, lap);
    for (std::size_t j = 0; j < g.size(); ++j) out.values[j] += 0.5 * dt * lap[j];
    kernels::solve_shifted(rows, 0.5 * dt, out.values);
  }
  return out;
}

NormReport semigroup_bound_sweep(const RadialGrid& g, const ScalarField& f, const std::vector<double>& s_grid,
                                 const std::vector<double>& exponents) {
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) || s_grid.empty() || s_grid.front() <= 0.0)
    throw Error(ErrorKind::invalid_parameter, "s grid must be positive and increasing", "s_grid");
  NormReport rep;
  std::vector<double> base;
  for (double p : exponents) base.push_back(lp_norm(g, f, p));
  std::vector<double> grad(exponents.size(), 0.0), lap(exponents.size(), 0.0);
  ScalarField cur = f;
  double s_prev = 0.0;
  for (double s : s_grid) {
    cur = heat_semigroup(g, cur, s - s_prev);
    s_prev = s;
    const ScalarField dr = radial_derivative(g, cur);
    const ScalarField lp = pinned_laplacian(g, cur);
    for (std::size_t i = 0; i < exponents.size(); ++i) {
      if (!(base[i] > 0.0)) continue;
      grad[i] = std::max(grad[i], std::sqrt(s) * lp_norm(g, dr, exponents[i]) / base[i]);
      lap[i] = std::max(lap[i], s * lp_norm(g, lp, exponents[i]) / base[i]);
    }
  }
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const std::string tag = "_p" + std::to_string(static_cast<int>(exponents[i]));
    rep.set("grad" + tag, grad[i]);
    rep.set("lap" + tag, lap[i]);
  }
  return rep;
}

std::vector<double> geometric_grid(double s_min, double s_max, double rho) {
  if (!(s_min > 0.0) || !(s_max > s_min) || !(rho > 1.0))
    throw Error(ErrorKind::invalid_parameter, "need 0 < s_min < s_max and rho > 1", "s_grid");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double s = s_min * std::pow(rho, k);
    out.push_back(s);
    if (s >= s_max * (1.0 - 1e-12)) break;
  }
  return out;
}

Reconstruction lp_reconstruction(const RadialGrid& g, const ScalarField& f, const std::vector<double>& s_grid,
                                 int k) {
  if (k != 1 && k != 2) throw Error(ErrorKind::unsupported_order, "reconstruction order must be 1 or 2", "k");
  if (s_grid.size() < 3 || !std::is_sorted(s_grid.begin(), s_grid.end()) || s_grid.front() <= 0.0)
    throw Error(ErrorKind::invalid_parameter, "s grid must be positive and increasing", "s_grid");
  const double f_norm = std::sqrt(weighted_inner(g, f.values, f.values));
  Reconstruction out;
  if (!(f_norm > 0.0)) return out;

  // Integrand in the variable log s: s^k Lap^k e^{s Lap} f, up to sign.
  auto integrand = [&](const ScalarField& heat, double s) {
    ScalarField l = pinned_laplacian(g, heat);
    if (k == 2) l = pinned_laplacian(g, l);
    for (double& x : l.values) x *= (k == 1 ? -s : s * s);
    return l.values;
  };

  ScalarField cur = heat_semigroup(g, f, s_grid.front());
  std::vector<double> recon(g.size(), 0.0);
  std::vector<double> prev = integrand(cur, s_grid.front());
  // [0, s_min] by the trapezoid rule in s; the k = 1 integrand tends to -Lap f.
  {
    std::vector<double> at_zero(g.size(), 0.0);
    if (k == 1) {
      const ScalarField l0 = pinned_laplacian(g, f);
      for (std::size_t j = 0; j < g.size(); ++j) at_zero[j] = -l0.values[j];
    }
    const double s0 = s_grid.front();
    for (std::size_t j = 0; j < g.size(); ++j) recon[j] += 0.5 * s0 * (at_zero[j] + prev[j] / s0);
  }
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    cur = heat_semigroup(g, cur, s_grid[i] - s_grid[i - 1]);
    const auto next = integrand(cur, s_grid[i]);
    const double dlog = std::log(s_grid[i] / s_grid[i - 1]);
    for (std::size_t j = 0; j < g.size(); ++j) recon[j] += 0.5 * dlog * (prev[j] + next[j]);
    prev = next;
  }
  out.tail = std::sqrt(weighted_inner(g, cur.values, cur.values)) / f_norm;
  if (out.tail > kTailLimit)
    throw Error(ErrorKind::invalid_parameter, "heat ladder does not reach the decayed regime", "s_grid");
  std::vector<double> diff(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) diff[j] = f.values[j] - recon[j];
  out.residual = std::sqrt(weighted_inner(g, diff, diff)) / f_norm;
  return out;
}

}  // namespace calwave
