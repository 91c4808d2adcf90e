#include <doctest.h>

#include <cmath>
#include <random>

#include "calwave/caloric_gauge.hpp"
#include "calwave/error.hpp"
#include "calwave/pipeline.hpp"
#include "fixtures.hpp"

using namespace calwave;

namespace {

constexpr double kRho = 1.189207115002721;

Mat rotation2(double a) {
  Mat b(2, 2);
  b << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return b;
}

CaloricSlice make_slice(const ExtrinsicMapState& u, const Mat& e_inf, const std::vector<Vec>& seeds = {},
                        double s_max = 12.0) {
  const double h = u.grid->h;
  CaloricSlice sl;
  sl.res = run_heat_resolution(u, 0.25 * h * h, s_max, kRho);
  sl.frames = apply_limiting_gauge(transport_frame(sl.res, initial_frame(sl.res.states.front(), seeds)), sl.res, e_inf);
  return sl;
}

double max_abs(const NodeField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

double max_abs(const std::vector<NodeField>& fs) {
  double m = 0.0;
  for (const auto& f : fs) m = std::max(m, max_abs(f));
  return m;
}

const Vec north = Vec::Unit(3, 2);

}  // namespace

TEST_SUITE("caloric_gauge") {
  TEST_CASE("initial frame at the north pole") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const FrameField f = initial_frame(fixtures::constant_map(g));
    CHECK(f.levels.size() == 1);
    for (std::size_t j = 0; j < f.nodes; ++j) {
      const Mat e = f.frame(0, j);
      CHECK((e.col(0) - Vec::Unit(3, 0)).norm() == 0.0);
      CHECK((e.col(1) - Vec::Unit(3, 1)).norm() == 0.0);
    }
  }

  TEST_CASE("initial frame is orthonormal and oriented for random fields") {
    const GridPtr g = make_grid(4, 8.0, 80);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    std::vector<Vec> nodes;
    for (std::size_t j = 0; j < g->size(); ++j) {
      Vec v(3);
      for (int c = 0; c < 3; ++c) v[c] = nd(rng);
      nodes.push_back(v.normalized());
    }
    nodes.back() = north;
    const auto s = make_map_state(g, 2, 0, nodes, north);
    const FrameField f = initial_frame(s);
    CHECK(orthonormality_error(f) <= 1e-14);
    for (std::size_t j = 0; j < f.nodes; ++j) {
      const Mat e = f.frame(0, j);
      CHECK(std::abs(e.col(0).dot(s.node(j))) <= 1e-14);
      Mat m(3, 3);
      m << e, s.node(j);
      CHECK(m.determinant() > 0.0);
    }
  }

  TEST_CASE("degenerate seed falls back to the next axis") {
    const GridPtr g = make_grid(4, 8.0, 80);
    std::vector<Vec> nodes(g->size(), Vec::Unit(3, 0));
    const auto s = make_map_state(g, 2, 0, nodes, Vec::Unit(3, 0));
    const FrameField f = initial_frame(s);
    CHECK(orthonormality_error(f) <= 1e-14);
    for (std::size_t j = 0; j < f.nodes; ++j) CHECK((f.frame(0, j).transpose() * Vec::Unit(3, 0)).norm() <= 1e-14);
    CHECK_THROWS_AS(initial_frame(s, {Vec::Unit(4, 0)}), Error);
  }

  TEST_CASE("transport along a constant resolution is trivial") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto c = fixtures::constant_map(g);
    const HeatResolution res = run_heat_resolution(c, 0.0025, 12.0, kRho);
    const FrameField f = transport_frame(res, initial_frame(c));
    CHECK(f.levels.size() == res.levels());
    for (std::size_t k = 1; k < f.levels.size(); ++k) CHECK((f.levels[k] - f.levels[0]).cwiseAbs().maxCoeff() == 0.0);
    const FrameField a = apply_limiting_gauge(f, res, default_limit_frame(north));
    for (std::size_t k = 0; k < a.levels.size(); ++k) CHECK((a.levels[k] - f.levels[0]).cwiseAbs().maxCoeff() <= 1e-15);
  }

  TEST_CASE("transport keeps the frame orthonormal and tangent") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u = fixtures::twisted_bump(g, 0.3);
    const HeatResolution res = run_heat_resolution(u, 0.0025, 12.0, kRho);
    const FrameField f = transport_frame(res, initial_frame(u));
    CHECK(orthonormality_error(f) <= 1e-8);
    CHECK(tangency_error(f, res) <= 1e-7);
    CHECK(f.reorthonormalizations == 0);
    CHECK(f.s_derivative.size() == f.levels.size());
  }

  TEST_CASE("limiting gauge aligns the top level and is a rotation") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u = fixtures::twisted_bump(g, 0.3);
    const HeatResolution res = run_heat_resolution(u, 0.0025, 12.0, kRho);
    const FrameField raw = transport_frame(res, initial_frame(u));
    const Mat e_inf = default_limit_frame(north) * rotation2(0.4);
    const FrameField f = apply_limiting_gauge(raw, res, e_inf);
    const std::size_t top = f.levels.size() - 1, last = f.nodes - 1;
    CHECK((f.frame(top, last) - e_inf).cwiseAbs().maxCoeff() <= 1e-10);
    for (std::size_t j = 0; j < f.nodes; ++j) {
      const Mat b = raw.frame(0, j).transpose() * f.frame(0, j);
      CHECK((b.transpose() * b - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(b.determinant() - 1.0) <= 1e-12);
      const Mat b_top = raw.frame(top, j).transpose() * f.frame(top, j);
      CHECK((b_top - b).cwiseAbs().maxCoeff() <= 1e-10);
    }
    const FrameField again = apply_limiting_gauge(f, res, e_inf);
    for (std::size_t k = 0; k < f.levels.size(); ++k) CHECK((again.levels[k] - f.levels[k]).cwiseAbs().maxCoeff() <= 1e-13);

    Mat flipped = e_inf;
    flipped.col(0).swap(flipped.col(1));
    try {
      apply_limiting_gauge(raw, res, flipped);
      FAIL("orientation flip accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::orientation_mismatch);
    }
  }

  TEST_CASE("constant data has vanishing gauge fields") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto sl = make_slice(fixtures::constant_map(g), default_limit_frame(north));
    const GaugeData gd = compute_gauge_data(sl, &sl, &sl, 0.05);
    for (const auto* f : {&gd.psi_s, &gd.psi_r, &gd.psi_t, &gd.A_s, &gd.A_r, &gd.A_t, &gd.F_sr, &gd.F_st, &gd.F_tr})
      CHECK(max_abs(*f) == 0.0);
    for (const auto& [k, e] : verify_reconstruction(gd).entries) {
      CHECK(e.l2 == 0.0);
      CHECK(e.linf == 0.0);
    }
    const GaugeWindow w{gd, gd, gd, 0.05};
    for (const auto& [k, e] : verify_structure(w).entries) CHECK(e.l2 == 0.0);
    for (const auto& [k, e] : dynamic_residuals(w).entries) CHECK(e.l2 == 0.0);
    for (const auto& lvl : wave_tension(w)) CHECK(max_abs(lvl) == 0.0);
  }

  TEST_CASE("gauge data of a small bump") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto sl = make_slice(fixtures::twisted_bump(g, 0.05), default_limit_frame(north));
    const GaugeData gd = compute_gauge_data(sl);
    CHECK_FALSE(gd.has_time);
    CHECK(gd.tension_consistency <= 1e-8);
    CHECK(max_abs(gd.A_s) <= 1e-7);
    CHECK(gd.max_raw_symmetric < 1e-4);
    for (const auto* fs : {&gd.A_r, &gd.A_s, &gd.F_sr}) {
      for (const auto& f : *fs) {
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
          const Mat m = Eigen::Map<const Mat>(f.col(j).data(), 2, 2);
          CHECK((m + m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
      }
    }
    const ResidualReport rec = verify_reconstruction(gd);
    CHECK(rec.at("AF.r").relative_l2() < 0.1);
    CHECK(rec.at("paps.r").relative_l2() < 0.1);
    CHECK(rec.at("tail.A").l2 <= 1e-6);
    const ResidualReport st = verify_structure(gd);
    CHECK(st.entries.count("Fdu.sr") == 1);
  }

  TEST_CASE("heat-time decay is superlinear on the upper ladder") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto sl = make_slice(fixtures::twisted_bump(g, 0.05), default_limit_frame(north));
    const GaugeData gd = compute_gauge_data(sl);
    const std::size_t lo = gd.levels() / 2, hi = gd.levels() - 1;
    auto slope = [&](const std::vector<NodeField>& f) {
      return std::log(max_abs(f[hi]) / max_abs(f[lo])) / std::log(gd.s_levels[hi] / gd.s_levels[lo]);
    };
    CHECK(slope(gd.psi_s) < -1.0);
    CHECK(slope(gd.A_r) < -1.0);
  }

  TEST_CASE("rotating the limiting frame transforms the gauge fields covariantly") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u = fixtures::twisted_bump(g, 0.05);
    const Mat b = rotation2(0.7);
    const auto a = make_slice(u, default_limit_frame(north));
    const auto r = make_slice(u, default_limit_frame(north) * b);
    const GaugeData ga = compute_gauge_data(a), gr = compute_gauge_data(r);
    for (std::size_t k = 0; k < ga.levels(); ++k) {
      CHECK((gr.psi_s[k] - b.transpose() * ga.psi_s[k]).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((gr.psi_r[k] - b.transpose() * ga.psi_r[k]).cwiseAbs().maxCoeff() <= 1e-12);
      for (Eigen::Index j = 0; j < ga.A_r[k].cols(); ++j) {
        const Mat x = Eigen::Map<const Mat>(ga.A_r[k].col(j).data(), 2, 2);
        const Mat y = Eigen::Map<const Mat>(gr.A_r[k].col(j).data(), 2, 2);
        CHECK((y - b.transpose() * x * b).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
    const FrameField manual = rotate_gauge(a.frames, b);
    for (std::size_t k = 0; k < manual.levels.size(); ++k)
      CHECK((manual.levels[k] - r.frames.levels[k]).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("the caloric gauge does not depend on the initial seeds") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u = fixtures::twisted_bump(g, 0.05);
    const Mat e_inf = default_limit_frame(north);
    Vec s0(3), s1(3);
    s0 << 0.0, 1.0, 0.2;
    s1 << -1.0, 0.3, 0.0;
    const GaugeData a = compute_gauge_data(make_slice(u, e_inf));
    const GaugeData b = compute_gauge_data(make_slice(u, e_inf, {s0, s1}));
    for (std::size_t k = 0; k < a.levels(); ++k) {
      CHECK((a.psi_s[k] - b.psi_s[k]).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((a.A_r[k] - b.A_r[k]).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("wave tension separates wave maps from static non-harmonic data") {
    PipelineConfig c;
    c.norm_sample = false;
    const PipelineResult wave = run_coupled_pipeline(c);
    CHECK(wave.window.size() == 3);
    const double wave_w0 = wave.residuals.at("w0").relative_l2();
    CHECK(wave_w0 < 0.1);

    const int n = static_cast<int>(std::lround(c.r_max / c.h));
    const GridPtr g = make_grid(c.d, c.r_max, n);
    const auto sl = make_slice(pipeline_initial_data(c, g).position, default_limit_frame(north));
    const GaugeData gd = compute_gauge_data(sl, &sl, &sl, 0.5 * c.h);
    const GaugeWindow w{gd, gd, gd, 0.5 * c.h};
    const double static_w0 = dynamic_residuals(w).at("w0").relative_l2();
    CHECK(static_w0 > 0.5);
    CHECK(static_w0 > 10.0 * wave_w0);
  }

  TEST_CASE("zero data gives an all-zero pipeline") {
    PipelineConfig c;
    c.amplitude = 0.0;
    c.velocity = 0.0;
    const PipelineResult r = run_coupled_pipeline(c);
    for (const auto& [k, e] : r.residuals.entries) CHECK(e.l2 == 0.0);
    for (const auto& [k, v] : r.norms.entries()) CHECK(v == 0.0);
  }

  TEST_CASE("mismatched inputs are rejected") {
    const GridPtr g = make_grid(4, 8.0, 80);
    const auto u = fixtures::twisted_bump(g, 0.05);
    const auto a = make_slice(u, default_limit_frame(north));
    const auto b = make_slice(u, default_limit_frame(north), {}, 20.0);
    auto kind_of = [](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::io;
    };
    CHECK(kind_of([&] { compute_gauge_data(a, &b, &b, 0.05); }) == ErrorKind::invalid_configuration);
    CHECK(kind_of([&] { compute_gauge_data(a, &a, nullptr, 0.05); }) == ErrorKind::invalid_configuration);
    CHECK(kind_of([&] { compute_gauge_data(a, &a, &a, 0.0); }) == ErrorKind::invalid_configuration);
    const FrameField coarse = initial_frame(fixtures::constant_map(make_grid(4, 8.0, 40)));
    CHECK(kind_of([&] { transport_frame(a.res, coarse); }) == ErrorKind::invalid_configuration);
  }
}
