#include <doctest.h>

#include <cmath>

#include "calwave/error.hpp"
#include "calwave/heat_flow.hpp"
#include "fixtures.hpp"

using namespace calwave;
using fixtures::sup_abs;

namespace {

// Component of the extrinsic tension along d/dpsi of the equatorial map.
std::vector<double> angular_component(const ExtrinsicMapState& s, const std::vector<double>& v) {
  const std::size_t n = s.nodes();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::atan2(s.at(0, j), s.at(2, j));
    out[j] = std::cos(p) * v[j] - std::sin(p) * v[2 * n + j];
  }
  return out;
}

}  // namespace

TEST_SUITE("heat_flow") {
  TEST_CASE("constant maps are fixed points") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto c = fixtures::constant_map(g);
    CHECK(sup_abs(heat_rhs_extrinsic(c)) == 0.0);
    const auto next = step_heat(c, 1e-3, HeatScheme::explicit_rk4);
    CHECK(next.values == c.values);
    const HeatResolution res = run_heat_resolution(c, 0.0025, 5.0, 1.5);
    for (const auto& t : res.tension) CHECK(sup_abs(t) == 0.0);
    for (const auto& st : res.states) CHECK(st.values == c.values);
    const NormReport rep = smoothing_report(res);
    for (const auto& [k, v] : rep.entries()) CHECK(v == 0.0);
  }

  TEST_CASE("tension is tangent to second order") {
    std::vector<double> errs;
    for (int n : {80, 160, 40000}) {
      const GridPtr g = make_grid(4, 8.0, n);
      const auto s = fixtures::twisted_bump(g, 0.5);
      const auto rhs = heat_rhs_extrinsic(s);
      const auto dens = gradient_density(s);
      double normal = 0.0;
      const std::size_t N = s.nodes();
      for (std::size_t j = 0; j + 1 < N; ++j) {
        double dot = 0.0;
        for (int c = 0; c < 3; ++c) dot += rhs[c * N + j] * s.at(c, j);
        normal = std::max(normal, std::abs(dot));
      }
      errs.push_back(normal / sup_abs(dens));
    }
    CHECK(errs[0] / errs[1] > 3.5);
    CHECK(errs[2] <= 1e-6);
  }

  TEST_CASE("equatorial Q profile is harmonic") {
    std::vector<double> errs;
    for (int n : {200, 400}) {
      const GridPtr g = make_grid(2, 10.0, n);
      const auto s = fixtures::equatorial(g, [](double r) { return harmonic_profile({ProfileFamily::Q, 0.8}, r); });
      const auto t = angular_component(s, heat_tension(s));
      double e = 0.0;
      for (std::size_t j = 0; j + 1 < s.nodes(); ++j) e = std::max(e, std::abs(t[j]));
      errs.push_back(e);
    }
    CHECK(errs[1] < 1e-3);
    CHECK(errs[0] / errs[1] > 3.5);
  }

  TEST_CASE("equivariant and extrinsic tensions agree") {
    const PolarTarget sphere{PolarKind::sphere};
    auto psi = [](double r) { return 0.8 * r * std::exp(-r * r / 2.0); };
    std::vector<double> errs;
    for (int n : {160, 320}) {
      const GridPtr g = make_grid(2, 8.0, n);
      const auto s = fixtures::equatorial(g, psi);
      const auto t = angular_component(s, heat_tension(s));
      EquivariantProfile p{g, sample_field(*g, Parity::odd, psi), 0.0};
      p.psi_infty = p.psi.values.back();
      const auto q = heat_rhs_equivariant(p, sphere);
      double e = 0.0;
      for (std::size_t j = 0; j + 1 < g->size(); ++j) e = std::max(e, std::abs(t[j] - q.values[j]));
      errs.push_back(e);
    }
    CHECK(errs[1] < 1e-2);
    CHECK(errs[0] / errs[1] > 3.0);
  }

  TEST_CASE("harmonic profiles are stationary under the equivariant flow") {
    const GridPtr g = make_grid(2, 20.0, 2000);
    const PolarTarget hyp{PolarKind::hyperbolic};
    EquivariantProfile p{g, sample_field(*g, Parity::odd, [](double r) {
                           return harmonic_profile({ProfileFamily::P, 0.5}, r);
                         }),
                         0.0};
    p.psi_infty = p.psi.values.back();
    const auto zero = heat_rhs_equivariant(EquivariantProfile{g, {std::vector<double>(g->size(), 0.0), Parity::odd}, 0.0}, hyp);
    CHECK(sup_abs(zero.values) == 0.0);
    CHECK(sup_abs(heat_rhs_equivariant(p, hyp).values) < 1e-4);
    const double ds = 0.5 * max_heat_step(p, hyp, HeatScheme::explicit_rk4);
    EquivariantProfile q = p;
    for (int i = 0; i < 100; ++i) q = step_heat(q, hyp, ds, HeatScheme::explicit_rk4);
    double drift = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) drift = std::max(drift, std::abs(q.psi.values[j] - p.psi.values[j]));
    CHECK(drift <= 1e-6);
  }

  TEST_CASE("step control") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto s = fixtures::twisted_bump(g, 0.3);
    const double cap = max_heat_step(s, HeatScheme::explicit_rk4);
    try {
      step_heat(s, 2.0 * cap, HeatScheme::explicit_rk4);
      FAIL("oversized step accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::stability_refused);
    }
    CHECK_THROWS_AS(step_heat(s, -1.0, HeatScheme::explicit_rk4), Error);
    auto cur = s;
    for (int i = 0; i < 20; ++i) {
      cur = step_heat(cur, cap, HeatScheme::explicit_rk4);
      CHECK(constraint_violation(cur) <= 1e-8);
    }
    CHECK(constraint_violation(s) <= 1e-15);
    CHECK(max_heat_step(s, HeatScheme::imex) > cap);
  }

  TEST_CASE("energy dissipates along the flow") {
    const GridPtr g = make_grid(4, 8.0, 80);
    auto cur = fixtures::twisted_bump(g, 0.4);
    const double ds = max_heat_step(cur, HeatScheme::explicit_rk4);
    double e = dirichlet_energy(cur);
    double tension_prev = INFINITY;
    for (int i = 0; i < 200; ++i) {
      cur = step_heat(cur, ds, HeatScheme::explicit_rk4);
      const double next = dirichlet_energy(cur);
      CHECK(next <= e * (1.0 + 1e-8));
      e = next;
      const auto t = heat_tension(cur);
      double l2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        std::vector<double> comp(t.begin() + c * g->size(), t.begin() + (c + 1) * g->size());
        l2 += weighted_inner(*g, comp, comp);
      }
      CHECK(l2 <= tension_prev * (1.0 + 1e-8));
      tension_prev = l2;
    }
  }

  TEST_CASE("resolution ladder and decay") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u0 = fixtures::twisted_bump(g, 0.05);
    const HeatResolution res = run_heat_resolution(u0, 0.0025, 60.0, 1.5);
    CHECK(res.s_levels.front() == 0.0);
    for (std::size_t k = 1; k < res.levels(); ++k) CHECK(res.s_levels[k] > res.s_levels[k - 1]);
    CHECK(res.s_levels.back() >= 60.0);
    for (const auto& st : res.states) CHECK(st.grid == g);
    for (std::size_t k = 0; k < res.levels(); ++k) CHECK(res.tension[k] == heat_tension(res.states[k]));
    double e = INFINITY;
    for (const auto& st : res.states) {
      CHECK(dirichlet_energy(st) <= e);
      e = dirichlet_energy(st);
    }
    double far = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) far = std::max(far, (res.states.back().node(j) - Vec::Unit(3, 2)).lpNorm<Eigen::Infinity>());
    CHECK(far <= 1e-3);
    CHECK_THROWS_AS(run_heat_resolution(u0, 0.1, 5.0, 1.5), Error);
    CHECK_THROWS_AS(run_heat_resolution(u0, 0.0025, 5.0, 2.5), Error);
  }

  TEST_CASE("imex and rk4 resolutions agree") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u0 = fixtures::twisted_bump(g, 0.05);
    const auto a = run_heat_resolution(u0, 0.0025, 2.0, 1.5, HeatScheme::explicit_rk4);
    const auto b = run_heat_resolution(u0, 0.0025, 2.0, 1.5, HeatScheme::imex);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.states.back().values.size(); ++i)
      diff = std::max(diff, std::abs(a.states.back().values[i] - b.states.back().values[i]));
    CHECK(diff < 1e-3);
  }

  TEST_CASE("smoothing report is bounded and linear in the amplitude") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const double h = g->h;
    const auto big = fixtures::twisted_bump(g, 0.004);
    const auto small = fixtures::twisted_bump(g, 0.002);
    const NormReport rb = smoothing_report(run_heat_resolution(big, 0.25 * h * h, 12.0, 1.189207115002721));
    const NormReport rs = smoothing_report(run_heat_resolution(small, 0.25 * h * h, 12.0, 1.189207115002721));
    const double h1 = gradient_h1_norm(big);
    CHECK(h1 <= 0.2);
    CHECK(rb.entries().size() == 6);
    for (const auto& [k, v] : rb.entries()) {
      CHECK(std::isfinite(v));
      CHECK(v <= 10.0 * h1);
      CHECK(rs.at(k) / v == doctest::Approx(0.5).epsilon(0.2));
    }
  }

  TEST_CASE("ladder validation") {
    CHECK_THROWS_AS(heat_ladder(0.0, 1.0, 1.5), Error);
    CHECK_THROWS_AS(heat_ladder(1.0, 0.5, 1.5), Error);
    CHECK_THROWS_AS(heat_ladder(0.1, 1.0, 1.0), Error);
    const auto l = heat_ladder(0.01, 1.0, 2.0);
    CHECK(l.front() == 0.0);
    CHECK(l[1] == 0.01);
    CHECK(l.back() >= 1.0);
    CHECK(l[l.size() - 2] < 1.0);
  }
}
