#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "calwave/error.hpp"
#include "calwave/targets.hpp"

using namespace calwave;

namespace {

constexpr double pi = std::numbers::pi;

Vec unit(int i) { return Vec::Unit(3, i); }

Vec random_tangent(const Vec& u, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(3);
  for (int i = 0; i < 3; ++i) v[i] = nd(rng);
  return v - v.dot(u) * u;
}

Vec random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(3);
  for (int i = 0; i < 3; ++i) v[i] = nd(rng);
  return v.normalized();
}

// Equivariant static operator psi_rr + coth psi_r - g g' / sinh^2 at a node,
// by centered differences of the closed-form profile.
double static_residual(const HarmonicProfile& p, double r, double h) {
  const PolarTarget t = target_of(p.family);
  const double a = harmonic_profile(p, r - h), b = harmonic_profile(p, r), c = harmonic_profile(p, r + h);
  const double prr = (a - 2.0 * b + c) / (h * h), pr = (c - a) / (2.0 * h);
  return prr + pr / std::tanh(r) - t.force(b) / std::pow(std::sinh(r), 2);
}

}  // namespace

TEST_SUITE("targets") {
  TEST_CASE("projection to the sphere") {
    Vec v(3);
    v << 0.0, 0.0, 2.0;
    CHECK((project_to_sphere(v) - unit(2)).norm() == 0.0);
    const Vec u = unit(1);
    CHECK((project_to_sphere(u) - u).norm() == 0.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 100; ++i) {
      Vec w(3);
      for (int c = 0; c < 3; ++c) w[c] = nd(rng);
      const Vec p = project_to_sphere(w);
      CHECK(std::abs(p.norm() - 1.0) <= 1e-15);
      CHECK((project_to_sphere(p) - p).norm() <= 1e-15);
    }
    try {
      project_to_sphere(Vec::Zero(3));
      FAIL("zero vector projected");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate);
    }
  }

  TEST_CASE("second fundamental form") {
    const SphereTarget s{2};
    const Vec u = unit(2);
    CHECK(second_fundamental_form(s, u, unit(0), unit(1)).norm() == 0.0);
    CHECK((second_fundamental_form(s, u, unit(0), unit(0)) + unit(2)).norm() == 0.0);

    // Oracle: second derivative of the great circle cos(t) u + sin(t) X at t = 0.
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
      const Vec p = random_unit(rng);
      Vec x = random_tangent(p, rng);
      x.normalize();
      const double t = 1e-4;
      const Vec accel = (std::cos(t) * p + std::sin(t) * x - 2.0 * p + std::cos(-t) * p + std::sin(-t) * x) / (t * t);
      CHECK((second_fundamental_form(s, p, x, x) - accel).norm() < 1e-6);

      const Vec y = random_tangent(p, rng);
      const Vec out = second_fundamental_form(s, p, x, y);
      CHECK((out - out.dot(p) * p).norm() <= 1e-14);
    }
    CHECK_THROWS_AS(second_fundamental_form(s, u, unit(2), unit(0)), Error);
  }

  TEST_CASE("riemann curvature") {
    const SphereTarget s{2};
    const Vec u = unit(2);
    CHECK(riemann_curvature(s, u, unit(0), unit(0), unit(1)).norm() == 0.0);
    CHECK((riemann_curvature(s, u, unit(0), unit(1), unit(1)) - unit(0)).norm() <= 1e-15);

    // Gauss equation oracle: <R(X,Y)Z,W> = <S(Y,Z),S(X,W)> - <S(X,Z),S(Y,W)>.
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
      const Vec p = random_unit(rng);
      const Vec x = random_tangent(p, rng), y = random_tangent(p, rng), z = random_tangent(p, rng),
                w = random_tangent(p, rng);
      const double lhs = riemann_curvature(s, p, x, y, z).dot(w);
      const double gauss = second_fundamental_form(s, p, y, z).dot(second_fundamental_form(s, p, x, w)) -
                           second_fundamental_form(s, p, x, z).dot(second_fundamental_form(s, p, y, w));
      CHECK(lhs == doctest::Approx(gauss).epsilon(1e-12));
      CHECK(std::abs(lhs + riemann_curvature(s, p, x, y, w).dot(z)) <= 1e-14 * (1.0 + std::abs(lhs)));
    }
    try {
      riemann_curvature(s, u, unit(2), unit(0), unit(1));
      FAIL("normal input accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::tangency_violation);
    }
  }

  TEST_CASE("polar targets") {
    const PolarTarget sph{PolarKind::sphere}, hyp{PolarKind::hyperbolic};
    for (const auto& t : {sph, hyp}) {
      CHECK(t.g(0.0) == 0.0);
      CHECK(t.dg(0.0) == 1.0);
      CHECK(t.force(0.7) == doctest::Approx(t.g(0.7) * t.dg(0.7)));
    }
    CHECK(sph.g(0.5) == doctest::Approx(std::sin(0.5)));
    CHECK(hyp.g(0.5) == doctest::Approx(std::sinh(0.5)));
  }

  TEST_CASE("harmonic profiles") {
    const HarmonicProfile p0{ProfileFamily::P, 0.0};
    for (double r : {0.0, 1.0, 10.0}) CHECK(harmonic_profile(p0, r) == 0.0);
    const HarmonicProfile ph{ProfileFamily::P, 0.5};
    CHECK(harmonic_profile(ph, 40.0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(harmonic_profile_limit(ph) == doctest::Approx(2.0 * std::atanh(0.5)));
    const HarmonicProfile q1{ProfileFamily::Q, 1.0};
    CHECK(harmonic_profile(q1, 40.0) == doctest::Approx(pi / 2.0).epsilon(1e-12));
    CHECK(harmonic_profile(ph, 1.3) == doctest::Approx(2.0 * std::atanh(0.5 * std::tanh(0.65))));

    auto key_of = [](const HarmonicProfile& p) {
      try {
        harmonic_profile(p, 1.0);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_parameter);
        return e.key();
      }
      return std::string();
    };
    CHECK(key_of({ProfileFamily::P, 1.0}) == "lambda");
    CHECK(key_of({ProfileFamily::Q, -0.1}) == "lambda");
  }

  TEST_CASE("profiles are static equivariant harmonic maps") {
    for (auto fam : {ProfileFamily::P, ProfileFamily::Q}) {
      for (double lam : {0.3, 0.7}) {
        const HarmonicProfile p{fam, lam};
        double e1 = 0.0, e2 = 0.0;
        for (double r = 0.5; r < 8.0; r += 0.25) {
          e1 = std::max(e1, std::abs(static_residual(p, r, 1e-2)));
          e2 = std::max(e2, std::abs(static_residual(p, r, 5e-3)));
        }
        CHECK(e2 < 1e-4);
        CHECK(e1 / e2 > 3.5);
      }
    }
  }

  TEST_CASE("profile energies match the closed forms") {
    const RadialGrid g = build_radial_grid(2, 40.0, 8000);
    const ProfileEnergy ep = profile_energy(g, {ProfileFamily::P, 1.0 / std::sqrt(2.0)});
    CHECK(ep.energy == doctest::Approx(4.0 * pi).epsilon(1e-4));
    CHECK_FALSE(ep.truncated);
    CHECK(profile_energy(g, {ProfileFamily::Q, 1.0}).energy == doctest::Approx(2.0 * pi).epsilon(1e-4));
    CHECK(profile_energy(g, {ProfileFamily::P, 0.0}).energy == 0.0);

    double prev_p = -1.0, prev_q = -1.0;
    for (int i = 1; i <= 9; ++i) {
      const double lam = 0.1 * i;
      const double cf = 4.0 * pi * lam * lam / (1.0 - lam * lam);
      const double ep_lam = profile_energy(g, {ProfileFamily::P, lam}).energy;
      const double eq_lam = profile_energy(g, {ProfileFamily::Q, lam}).energy;
      CHECK(std::abs(ep_lam - cf) <= 1e-3 * (1.0 + cf));
      CHECK(closed_form_energy({ProfileFamily::P, lam}) == doctest::Approx(cf));
      CHECK(ep_lam > prev_p);
      CHECK(eq_lam > prev_q);
      prev_p = ep_lam;
      prev_q = eq_lam;
    }
  }

  TEST_CASE("short grids flag truncation and wrong dimensions are rejected") {
    const RadialGrid g = build_radial_grid(2, 4.0, 400);
    CHECK(profile_energy(g, {ProfileFamily::P, 0.9}).truncated);
    const RadialGrid g4 = build_radial_grid(4, 10.0, 100);
    try {
      profile_energy(g4, {ProfileFamily::P, 0.5});
      FAIL("d = 4 accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unsupported_dimension);
    }
  }
}
