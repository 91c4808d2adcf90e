#pragma once

#include <Eigen/Dense>

#include "calwave/geometry.hpp"

namespace calwave {

using Vec = Eigen::VectorXd;

/// Unit sphere S^n embedded in R^{n+1}.
struct SphereTarget {
  int n = 2;
};

enum class PolarKind { sphere, hyperbolic };

/// Target metric dpsi^2 + g(psi)^2 dtheta^2 with g = sin or sinh.
struct PolarTarget {
  PolarKind kind = PolarKind::hyperbolic;

  double g(double psi) const;
  double dg(double psi) const;
  /// g(psi) g'(psi), the angular force term.
  double force(double psi) const;
};

enum class ProfileFamily { P, Q };

/// P: hyperbolic target, 0 <= lambda < 1. Q: sphere target, lambda >= 0.
struct HarmonicProfile {
  ProfileFamily family = ProfileFamily::P;
  double lambda = 0.0;
};

PolarTarget target_of(ProfileFamily family);

Vec project_to_sphere(const Vec& v);
Vec second_fundamental_form(const SphereTarget& target, const Vec& u, const Vec& x, const Vec& y);
Vec riemann_curvature(const SphereTarget& target, const Vec& u, const Vec& x, const Vec& y,
                      const Vec& z);

void validate_profile(const HarmonicProfile& p);
double harmonic_profile(const HarmonicProfile& p, double r);
double harmonic_profile_limit(const HarmonicProfile& p);

/// 4 pi lambda^2 / (1 - lambda^2) for P and 4 pi lambda^2 / (1 + lambda^2) for Q.
double closed_form_energy(const HarmonicProfile& p);

struct ProfileEnergy {
  double energy = 0.0;
  double tail_estimate = 0.0;
  bool truncated = false;
};

/// pi * integral of (psi_r^2 + g(psi)^2 / sinh^2 r) sinh r dr on a d = 2 grid.
ProfileEnergy profile_energy(const RadialGrid& grid, const HarmonicProfile& p);

/// Same quadrature for an arbitrary odd profile and velocity.
double equivariant_energy(const RadialGrid& grid, const std::vector<double>& psi,
                          const std::vector<double>& velocity, const PolarTarget& target);

}  // namespace calwave
