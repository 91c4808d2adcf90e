#include "calwave/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calwave/error.hpp"

namespace calwave {

namespace {

constexpr double kTangencyTol = 1e-8;

void require_ambient(const SphereTarget& t, const Vec& v, const char* name) {
  if (t.n < 1) throw Error(ErrorKind::invalid_parameter, "sphere dimension must be at least 1", "n");
  if (v.size() != t.n + 1)
    throw Error(ErrorKind::invalid_configuration, "ambient dimension mismatch", name);
}

void require_tangent(const Vec& u, const Vec& x, const char* name) {
  if (std::abs(u.dot(x)) > kTangencyTol * (1.0 + x.norm()))
    throw Error(ErrorKind::tangency_violation, "vector is not tangent to the sphere at u", name);
}

}  // namespace

double PolarTarget::g(double psi) const {
  return kind == PolarKind::sphere ? std::sin(psi) : std::sinh(psi);
}

double PolarTarget::dg(double psi) const {
  return kind == PolarKind::sphere ? std::cos(psi) : std::cosh(psi);
}

double PolarTarget::force(double psi) const {
  return kind == PolarKind::sphere ? 0.5 * std::sin(2.0 * psi) : 0.5 * std::sinh(2.0 * psi);
}

PolarTarget target_of(ProfileFamily family) {
  return PolarTarget{family == ProfileFamily::P ? PolarKind::hyperbolic : PolarKind::sphere};
}

Vec project_to_sphere(const Vec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorKind::degenerate, "cannot project the zero vector", "v");
  return v / norm;
}

Vec second_fundamental_form(const SphereTarget& target, const Vec& u, const Vec& x, const Vec& y) {
  require_ambient(target, u, "u");
  require_ambient(target, x, "X");
  require_ambient(target, y, "Y");
  require_tangent(u, x, "X");
  require_tangent(u, y, "Y");
  return -x.dot(y) * u;
}

Vec riemann_curvature(const SphereTarget& target, const Vec& u, const Vec& x, const Vec& y,
                      const Vec& z) {
  require_ambient(target, u, "u");
  require_ambient(target, x, "X");
  require_ambient(target, y, "Y");
  require_ambient(target, z, "Z");
  require_tangent(u, x, "X");
  require_tangent(u, y, "Y");
  require_tangent(u, z, "Z");
  return y.dot(z) * x - x.dot(z) * y;
}

void validate_profile(const HarmonicProfile& p) {
  if (!std::isfinite(p.lambda) || p.lambda < 0.0)
    throw Error(ErrorKind::invalid_parameter, "lambda must be nonnegative", "lambda");
  if (p.family == ProfileFamily::P && p.lambda >= 1.0)
    throw Error(ErrorKind::invalid_parameter, "family P requires lambda < 1", "lambda");
}

double harmonic_profile(const HarmonicProfile& p, double r) {
  validate_profile(p);
  if (r < 0.0) throw Error(ErrorKind::invalid_parameter, "radius must be nonnegative", "r");
  const double inner = p.lambda * std::tanh(0.5 * r);
  return p.family == ProfileFamily::P ? 2.0 * std::atanh(inner) : 2.0 * std::atan(inner);
}

double harmonic_profile_limit(const HarmonicProfile& p) {
  validate_profile(p);
  return p.family == ProfileFamily::P ? 2.0 * std::atanh(p.lambda) : 2.0 * std::atan(p.lambda);
}

double closed_form_energy(const HarmonicProfile& p) {
  validate_profile(p);
  const double l2 = p.lambda * p.lambda;
  const double denom = p.family == ProfileFamily::P ? 1.0 - l2 : 1.0 + l2;
  return 4.0 * std::numbers::pi * l2 / denom;
}

double equivariant_energy(const RadialGrid& grid, const std::vector<double>& psi,
                          const std::vector<double>& velocity, const PolarTarget& target) {
  const double h = grid.h;
  const int dm1 = grid.d - 1;
  double grad = 0.0, pot = 0.0, kin = 0.0, prev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double r = grid.nodes[j];
    const double dpsi = (psi[j] - prev) / h;
    grad += std::pow(std::sinh(r - 0.5 * h), dm1) * dpsi * dpsi;
    const double gv = target.g(psi[j]);
    const double sig = std::pow(std::sinh(r), dm1);
    pot += sig * gv * gv * grid.inv_sinh2[j];
    if (!velocity.empty()) kin += sig * velocity[j] * velocity[j];
    prev = psi[j];
  }
  return 0.5 * grid.sphere_area * h * (grad + pot + kin);
}

ProfileEnergy profile_energy(const RadialGrid& grid, const HarmonicProfile& p) {
  if (grid.d != 2) throw Error(ErrorKind::unsupported_dimension, "profile energies live on H^2", "d");
  validate_profile(p);
  std::vector<double> psi(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) psi[j] = harmonic_profile(p, grid.nodes[j]);
  const PolarTarget target = target_of(p.family);
  ProfileEnergy out;
  out.energy = equivariant_energy(grid, psi, {}, target);

  // Energy densities of both families decay like e^{-r}, so the tail beyond
  // r_max is about one e-folding length times the last density.
  const std::size_t last = grid.size() - 1;
  const double dpsi = (psi[last] - psi[last - 1]) / grid.h;
  const double gv = target.g(psi[last]);
  const double r = grid.nodes[last];
  out.tail_estimate =
      std::numbers::pi * (dpsi * dpsi + gv * gv * grid.inv_sinh2[last]) * std::sinh(r);
  out.truncated = out.tail_estimate > 1e-6 * std::max(out.energy, 1e-300) && out.energy > 0.0;
  return out;
}

}  // namespace calwave
