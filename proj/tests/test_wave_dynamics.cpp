#include <doctest.h>

#include <cmath>
#include <numbers>

#include "calwave/error.hpp"
#include "calwave/wave_dynamics.hpp"
#include "fixtures.hpp"

using namespace calwave;
using fixtures::sup_abs;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::io;
}

double interior_sup(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < f.values.size(); ++j) m = std::max(m, std::abs(f.values[j]));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Extrinsic d = 4 data: the twisted bump with a tangent velocity along the twist direction.
ExtrinsicWaveState moving_bump(GridPtr g, double amp) {
  ExtrinsicWaveState s{fixtures::twisted_bump(g, amp), {}, 0.0};
  const std::size_t n = s.position.nodes();
  s.velocity.assign(3 * n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const Vec u = s.position.node(j);
    Vec v(3);
    v << -u[1], u[0], 0.0;
    const double r = g->nodes[j];
    for (int c = 0; c < 3; ++c) s.velocity[c * n + j] = std::exp(-r * r) * v[c];
  }
  return s;
}

EquivariantWaveState bumped_soliton(GridPtr g, double lambda, double amp) {
  EquivariantWaveState s = soliton_state(g, {ProfileFamily::P, lambda});
  for (std::size_t j = 0; j < g->size(); ++j) s.position.psi.values[j] += amp * compact_bump(g->nodes[j], 2.0, 1.0);
  return s;
}

double relative_drift(EquivariantWaveState s, double T) {
  const double e0 = conserved_energy(s);
  const double dt = max_wave_step(*s.position.grid);
  const int steps = static_cast<int>(std::lround(T / dt));
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) {
    s = step_wave(s, dt);
    worst = std::max(worst, std::abs(conserved_energy(s) - e0) / e0);
  }
  return worst;
}

}  // namespace

TEST_SUITE("wave_dynamics") {
  TEST_CASE("equivariant right-hand side") {
    const GridPtr g = make_grid(2, 10.0, 200);
    EquivariantProfile zero{g, {std::vector<double>(g->size(), 0.0), Parity::odd}, 0.0};
    CHECK(sup_abs(wave_rhs_equivariant(zero, PolarTarget{PolarKind::sphere}).values) == 0.0);

    for (auto fam : {ProfileFamily::P, ProfileFamily::Q}) {
      std::vector<double> errs;
      for (int n : {200, 400}) {
        const auto s = soliton_state(make_grid(2, 10.0, n), {fam, 0.6});
        errs.push_back(interior_sup(wave_rhs_equivariant(s.position, s.target)));
      }
      CHECK(errs[1] < 1e-3);
      CHECK(errs[0] / errs[1] > 3.5);
    }
    const auto s4 = soliton_state(make_grid(4, 10.0, 100), {ProfileFamily::P, 0.5});
    CHECK(kind_of([&] { wave_rhs_equivariant(s4.position, s4.target); }) == ErrorKind::unsupported_dimension);
  }

  TEST_CASE("extrinsic right-hand side") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto c = fixtures::constant_map(g);
    const std::size_t n = c.nodes();
    std::vector<double> v(3 * n, 0.0);
    CHECK(sup_abs(wave_rhs_extrinsic(c, v)) == 0.0);

    for (std::size_t j = 0; j + 1 < n; ++j) v[j] = 0.3 * std::exp(-g->nodes[j]);
    const auto a = wave_rhs_extrinsic(c, v);
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(a[2 * n + j] + v[j] * v[j]) <= 1e-8);

    std::vector<double> bad(3 * n, 0.0);
    bad[2 * n] = 0.1;
    CHECK(kind_of([&] { wave_rhs_extrinsic(c, bad); }) == ErrorKind::tangency_violation);

    const GridPtr g2 = make_grid(2, 10.0, 400);
    const auto q = fixtures::equatorial(g2, [](double r) { return harmonic_profile({ProfileFamily::Q, 0.8}, r); });
    const auto rhs = wave_rhs_extrinsic(q, std::vector<double>(3 * q.nodes(), 0.0));
    CHECK(rhs == heat_rhs_extrinsic(q));
  }

  TEST_CASE("step control") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto s = moving_bump(g, 0.1);
    CHECK(max_wave_step(*g) == doctest::Approx(0.5 * g->h));
    CHECK(kind_of([&] { step_wave(s, 0.6 * g->h); }) == ErrorKind::stability_refused);
    CHECK(kind_of([&] { step_wave(s, 0.0); }) == ErrorKind::invalid_parameter);
    const auto e = soliton_state(make_grid(2, 8.0, 80), {ProfileFamily::Q, 0.5});
    CHECK(kind_of([&] { step_wave(e, 0.06); }) == ErrorKind::stability_refused);

    ExtrinsicWaveState c{fixtures::constant_map(g), std::vector<double>(3 * g->size(), 0.0), 0.0};
    const auto c1 = evolve(c, 1.0, max_wave_step(*g));
    CHECK(c1.position.values == c.position.values);
    CHECK(sup_abs(c1.velocity) == 0.0);
    CHECK(c1.time == doctest::Approx(1.0));
  }

  TEST_CASE("extrinsic steps preserve the constraints") {
    const GridPtr g = make_grid(4, 8.0, 160);
    auto s = moving_bump(g, 0.3);
    const std::size_t n = s.position.nodes();
    const double dt = max_wave_step(*g);
    for (int i = 0; i < 100; ++i) {
      s = step_wave(s, dt);
      CHECK(constraint_violation(s.position) <= 1e-12);
      double tang = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int c = 0; c < 3; ++c) dot += s.velocity[c * n + j] * s.position.at(c, j);
        tang = std::max(tang, std::abs(dot));
      }
      CHECK(tang <= 1e-8);
    }
  }

  TEST_CASE("leapfrog is time reversible") {
    const GridPtr g = make_grid(4, 8.0, 160);
    const auto s0 = moving_bump(g, 0.3);
    const double dt = max_wave_step(*g);
    auto s = evolve(s0, 100 * dt, dt, false);
    for (auto& x : s.velocity) x = -x;
    s = evolve(s, 100 * dt, dt, false);
    for (auto& x : s.velocity) x = -x;
    CHECK(sup_diff(s.position.values, s0.position.values) <= 1e-10);
    CHECK(sup_diff(s.velocity, s0.velocity) <= 1e-10);

    auto e = bumped_soliton(make_grid(2, 12.0, 240), 0.5, 0.1);
    const auto e0 = e;
    e = evolve(e, 5.0, max_wave_step(*e.position.grid));
    for (auto& x : e.velocity.values) x = -x;
    e = evolve(e, 5.0, max_wave_step(*e.position.grid));
    CHECK(sup_diff(e.position.psi.values, e0.position.psi.values) <= 1e-10);
  }

  TEST_CASE("soliton energies") {
    const GridPtr g = make_grid(2, 40.0, 4000);
    for (double lam : {0.3, 0.5, 1.0 / std::sqrt(2.0)}) {
      const double cf = 4.0 * std::numbers::pi * lam * lam / (1.0 - lam * lam);
      CHECK(conserved_energy(soliton_state(g, {ProfileFamily::P, lam})) == doctest::Approx(cf).epsilon(1e-3));
    }
    CHECK(conserved_energy(soliton_state(g, {ProfileFamily::P, 0.0})) == 0.0);
    ExtrinsicWaveState c{fixtures::constant_map(make_grid(4, 8.0, 80)), std::vector<double>(243, 0.0), 0.0};
    CHECK(conserved_energy(c) == 0.0);
  }

  TEST_CASE("energy drift is small and second order") {
    const double fine = relative_drift(bumped_soliton(make_grid(2, 25.0, 2500), 0.5, 0.1), 20.0);
    const double coarse = relative_drift(bumped_soliton(make_grid(2, 25.0, 1250), 0.5, 0.1), 20.0);
    CHECK(fine <= 1e-4);
    CHECK(std::log2(coarse / fine) >= 1.8);

    const GridPtr g = make_grid(4, 10.0, 400);
    auto s = moving_bump(g, 0.2);
    const double e0 = conserved_energy(s);
    s = evolve(s, 4.0, max_wave_step(*g));
    CHECK(std::abs(conserved_energy(s) - e0) / e0 <= 1e-3);
  }

  TEST_CASE("solitons are stationary") {
    for (auto fam : {ProfileFamily::P, ProfileFamily::Q}) {
      for (int n : {200, 400}) {
        const GridPtr g = make_grid(2, 20.0, n);
        const auto s0 = soliton_state(g, {fam, 0.5});
        auto s = s0;
        const double dt = max_wave_step(*g);
        double worst = 0.0;
        for (double t = 0.0; t < 10.0 - 1e-9; t += dt) {
          s = step_wave(s, dt);
          worst = std::max(worst, sup_diff(s.position.psi.values, s0.position.psi.values));
        }
        CHECK(worst <= 5.0 * g->h * g->h);
      }
    }
  }

  TEST_CASE("finite propagation speed") {
    const GridPtr g = make_grid(2, 15.0, 1500);
    EquivariantWaveState s = soliton_state(g, {ProfileFamily::Q, 0.0});
    const double center = 2.0, width = 0.5;
    for (std::size_t j = 0; j < g->size(); ++j) s.position.psi.values[j] = 0.2 * compact_bump(g->nodes[j], center, width);
    const double T = 3.0;
    s = evolve(s, T, max_wave_step(*g));
    double outside = 0.0, beyond_stencil = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      const double r = g->nodes[j], v = std::abs(s.position.psi.values[j]);
      if (r > center + width + T + 25.0 * g->h) outside = std::max(outside, v);
      if (r > center + width + 2.0 * T + 2.0 * g->h) beyond_stencil = std::max(beyond_stencil, v);
    }
    CHECK(outside <= 1e-12);
    CHECK(beyond_stencil == 0.0);
  }

  TEST_CASE("perturbed soliton disperses and keeps its boundary class") {
    const Trajectory quiet = perturbation_probe(ProfileFamily::P, 0.5, 0.0, 5.0);
    for (const auto& smp : quiet.samples) {
      CHECK(smp.diagnostics.at("local_energy") == 0.0);
      CHECK(smp.diagnostics.at("sup_deviation") == 0.0);
    }

    const Trajectory t = perturbation_probe(ProfileFamily::P, 0.5, 0.01, 30.0);
    REQUIRE(t.samples.size() > 2);
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      CHECK(t.samples[i].time > t.samples[i - 1].time);
      CHECK(std::abs(t.samples[i].diagnostics.at("boundary_value") - t.samples[0].diagnostics.at("boundary_value")) <= 1e-12);
    }
    CHECK(t.samples.back().time == doctest::Approx(30.0));
    CHECK(t.samples.back().diagnostics.at("local_energy") <= 0.2 * t.samples.front().diagnostics.at("local_energy"));

    ProbeSettings bad;
    bad.bump_center = 0.2;
    CHECK(kind_of([&] { perturbation_probe(ProfileFamily::P, 0.5, 0.01, 1.0, bad); }) == ErrorKind::invalid_parameter);
    CHECK(kind_of([&] { perturbation_probe(ProfileFamily::P, 1.5, 0.01, 1.0); }) == ErrorKind::invalid_parameter);
  }
}
