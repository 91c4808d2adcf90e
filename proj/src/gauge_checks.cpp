#include <algorithm>
#include <cmath>
#include <functional>

#include "calwave/caloric_gauge.hpp"
#include "calwave/error.hpp"

namespace calwave {

namespace {

// The two outermost nodes carry one-sided stencils and are left out.
constexpr std::size_t kOuterSkip = 2;

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
};

Norms field_norms(const RadialGrid& g, const NodeField& f) {
  Norms out;
  const std::size_t stop = g.size() - kOuterSkip;
  for (std::size_t j = 0; j < stop; ++j) {
    const double v = f.col(static_cast<Eigen::Index>(j)).norm();
    out.l2 += g.weights[j] * v * v;
    out.linf = std::max(out.linf, v);
  }
  out.l2 = std::sqrt(out.l2);
  return out;
}

void accumulate(ResidualEntry& e, const RadialGrid& g, const NodeField& residual, const NodeField& scale) {
  const Norms r = field_norms(g, residual);
  const Norms s = field_norms(g, scale);
  e.l2 = std::max(e.l2, r.l2);
  e.linf = std::max(e.linf, r.linf);
  e.scale_l2 = std::max(e.scale_l2, s.l2);
  e.scale_linf = std::max(e.scale_linf, s.linf);
  e.per_level.push_back(r.l2);
}

NodeField d_r(const RadialGrid& g, const NodeField& f, Parity parity) {
  NodeField out(f.rows(), f.cols());
  ScalarField row{std::vector<double>(f.cols()), parity};
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) row.values[j] = f(r, j);
    const auto d = radial_derivative(g, row);
    for (Eigen::Index j = 0; j < f.cols(); ++j) out(r, j) = d.values[j];
  }
  return out;
}

// Three-point derivative in s on the (nonuniform) ladder.
NodeField d_s(const std::vector<NodeField>& f, const std::vector<double>& s, std::size_t k) {
  const std::size_t last = s.size() - 1;
  std::size_t a = k == 0 ? 0 : (k == last ? last - 2 : k - 1);
  const double x0 = s[a], x1 = s[a + 1], x2 = s[a + 2];
  const double at = s[k];
  auto w = [&](double xi, double xj, double xk) { return ((at - xj) + (at - xk)) / ((xi - xj) * (xi - xk)); };
  return w(x0, x1, x2) * f[a] + w(x1, x0, x2) * f[a + 1] + w(x2, x0, x1) * f[a + 2];
}

// Matrix field times vector field, node by node.
NodeField act(const NodeField& m, const NodeField& v) {
  const auto n = v.rows();
  NodeField out(n, v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    out.col(j) = Eigen::Map<const Mat>(m.col(j).data(), n, n) * v.col(j);
  return out;
}

NodeField commutator(const NodeField& a, const NodeField& b, int n) {
  NodeField out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const Mat ma = Eigen::Map<const Mat>(a.col(j).data(), n, n);
    const Mat mb = Eigen::Map<const Mat>(b.col(j).data(), n, n);
    const Mat c = ma * mb - mb * ma;
    out.col(j) = Eigen::Map<const Vec>(c.data(), n * n);
  }
  return out;
}

NodeField curvature(const NodeField& x, const NodeField& y) {
  const auto n = x.rows();
  NodeField out(n * n, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Mat r = x.col(j) * y.col(j).transpose() - y.col(j) * x.col(j).transpose();
    out.col(j) = Eigen::Map<const Vec>(r.data(), n * n);
  }
  return out;
}

NodeField scale_by(const RadialGrid& g, const NodeField& f, const std::function<double(std::size_t)>& c) {
  NodeField out = f;
  for (std::size_t j = 0; j < g.size(); ++j) out.col(static_cast<Eigen::Index>(j)) *= c(j);
  return out;
}

// Trapezoid of f over the ladder from level k0 to the top.
NodeField ladder_integral(const std::vector<NodeField>& f, const std::vector<double>& s, std::size_t k0) {
  NodeField acc = NodeField::Zero(f[k0].rows(), f[k0].cols());
  for (std::size_t k = k0 + 1; k < s.size(); ++k) acc += 0.5 * (s[k] - s[k - 1]) * (f[k] + f[k - 1]);
  return acc;
}

// D^b D_b on a frame-valued scalar, given its covariant radial derivative.
NodeField scalar_box(const GaugeData& gd, std::size_t k, const NodeField& d_phi) {
  const RadialGrid& g = *gd.grid;
  const double dm1 = g.d - 1;
  return d_r(g, d_phi, Parity::odd) + act(gd.A_r[k], d_phi) +
         scale_by(g, d_phi, [&](std::size_t j) { return dm1 * g.coth[j]; });
}

NodeField covariant_r(const GaugeData& gd, std::size_t k, const NodeField& phi, Parity parity) {
  return d_r(*gd.grid, phi, parity) + act(gd.A_r[k], phi);
}

void require_time(const GaugeWindow& w) {
  if (!w.prev.has_time || !w.center.has_time || !w.next.has_time)
    throw Error(ErrorKind::invalid_configuration, "window slices need time derivatives", "t_slices");
  if (w.prev.levels() != w.center.levels() || w.next.levels() != w.center.levels())
    throw Error(ErrorKind::invalid_configuration, "window slices use different ladders", "ladder");
  if (!(w.dt > 0.0)) throw Error(ErrorKind::invalid_configuration, "time spacing must be positive", "dt");
}

void stamp(ResidualReport& rep, const GaugeData& gd) {
  rep.parameters["h"] = gd.grid->h;
  rep.parameters["r_max"] = gd.grid->r_max;
  rep.parameters["d"] = gd.grid->d;
  rep.parameters["levels"] = static_cast<double>(gd.levels());
  rep.parameters["s_max"] = gd.s_levels.back();
  if (gd.has_time) rep.parameters["dt"] = gd.dt;
}

}  // namespace

ResidualReport verify_reconstruction(const GaugeData& gd) {
  const RadialGrid& g = *gd.grid;
  ResidualReport rep;
  stamp(rep, gd);
  const std::size_t levels = gd.levels();
  if (levels < 4) throw Error(ErrorKind::invalid_parameter, "ladder is too short", "levels");

  std::vector<NodeField> paps_r, paps_t;
  for (std::size_t k = 0; k < levels; ++k) {
    paps_r.push_back(d_r(g, gd.psi_s[k], Parity::even) + act(gd.A_r[k], gd.psi_s[k]));
    if (gd.has_time) paps_t.push_back(gd.dt_psi_s[k] + act(gd.A_t[k], gd.psi_s[k]));
  }
  for (std::size_t k0 = 0; k0 < 3; ++k0) {
    accumulate(rep.entries["AF.r"], g, gd.A_r[k0] + ladder_integral(gd.F_sr, gd.s_levels, k0), gd.A_r[k0]);
    accumulate(rep.entries["paps.r"], g, gd.psi_r[k0] + ladder_integral(paps_r, gd.s_levels, k0), gd.psi_r[k0]);
    if (gd.has_time) {
      accumulate(rep.entries["AF.t"], g, gd.A_t[k0] + ladder_integral(gd.F_st, gd.s_levels, k0), gd.A_t[k0]);
      accumulate(rep.entries["paps.t"], g, gd.psi_t[k0] + ladder_integral(paps_t, gd.s_levels, k0),
                 gd.psi_t[k0]);
    }
  }

  const std::size_t top = levels - 1;
  NodeField zero_a = NodeField::Zero(gd.A_r[top].rows(), gd.A_r[top].cols());
  NodeField zero_p = NodeField::Zero(gd.psi_r[top].rows(), gd.psi_r[top].cols());
  auto& tail_a = rep.entries["tail.A"];
  accumulate(tail_a, g, gd.A_r[top], zero_a);
  accumulate(tail_a, g, gd.A_s[top], zero_a);
  auto& tail_p = rep.entries["tail.psi"];
  accumulate(tail_p, g, gd.psi_r[top], zero_p);
  accumulate(tail_p, g, gd.psi_s[top], zero_p);
  if (gd.has_time) {
    accumulate(tail_a, g, gd.A_t[top], zero_a);
    accumulate(tail_p, g, gd.psi_t[top], zero_p);
  }
  return rep;
}

namespace {

void spatial_structure(ResidualReport& rep, const GaugeData& gd) {
  const RadialGrid& g = *gd.grid;
  const int n = gd.dim;
  const double dm1 = g.d - 1;
  for (std::size_t k = 0; k < gd.levels(); ++k) {
    const NodeField conn = d_s(gd.A_r, gd.s_levels, k) - d_r(g, gd.A_s[k], Parity::even) +
                           commutator(gd.A_s[k], gd.A_r[k], n);
    accumulate(rep.entries["Fdu.sr"], g, conn - gd.F_sr[k], gd.F_sr[k]);

    const NodeField ds_psi_r = d_s(gd.psi_r, gd.s_levels, k);
    const NodeField dr_psi_s = covariant_r(gd, k, gd.psi_s[k], Parity::even);
    accumulate(rep.entries["Dsps.r"], g, ds_psi_r - dr_psi_s, ds_psi_r);

    const NodeField div = d_r(g, gd.F_sr[k], Parity::odd) +
                          scale_by(g, gd.F_sr[k], [&](std::size_t j) { return dm1 * g.coth[j]; });
    const NodeField lhs = div + commutator(gd.A_r[k], gd.F_sr[k], n);
    accumulate(rep.entries["sdivFs.s"], g, lhs - curvature(dr_psi_s, gd.psi_r[k]), div);
  }
}

}  // namespace

ResidualReport verify_structure(const GaugeData& gd) {
  ResidualReport rep;
  stamp(rep, gd);
  spatial_structure(rep, gd);
  return rep;
}

ResidualReport verify_structure(const GaugeWindow& w) {
  require_time(w);
  const GaugeData& gd = w.center;
  const RadialGrid& g = *gd.grid;
  const int n = gd.dim;
  const double dm1 = g.d - 1;
  ResidualReport rep;
  stamp(rep, gd);
  spatial_structure(rep, gd);
  for (std::size_t k = 0; k < gd.levels(); ++k) {
    const NodeField dt_a_s = (w.next.A_s[k] - w.prev.A_s[k]) / (2.0 * w.dt);
    const NodeField conn_st = d_s(gd.A_t, gd.s_levels, k) - dt_a_s + commutator(gd.A_s[k], gd.A_t[k], n);
    accumulate(rep.entries["Fdu.st"], g, conn_st - gd.F_st[k], gd.F_st[k]);

    const NodeField conn_tr = gd.dt_A_r[k] - d_r(g, gd.A_t[k], Parity::even) + commutator(gd.A_t[k], gd.A_r[k], n);
    accumulate(rep.entries["Fdu.tr"], g, conn_tr - gd.F_tr[k], gd.F_tr[k]);

    const NodeField dt_psi_r = gd.dt_psi_r[k] + act(gd.A_t[k], gd.psi_r[k]);
    const NodeField dr_psi_t = covariant_r(gd, k, gd.psi_t[k], Parity::even);
    accumulate(rep.entries["abba"], g, dt_psi_r - dr_psi_t, dt_psi_r);

    const NodeField ds_psi_t = d_s(gd.psi_t, gd.s_levels, k);
    const NodeField dt_psi_s = gd.dt_psi_s[k] + act(gd.A_t[k], gd.psi_s[k]);
    accumulate(rep.entries["Dsps.t"], g, ds_psi_t - dt_psi_s, ds_psi_t);

    const NodeField div = d_r(g, gd.F_tr[k], Parity::odd) +
                          scale_by(g, gd.F_tr[k], [&](std::size_t j) { return dm1 * g.coth[j]; });
    const NodeField lhs = div + commutator(gd.A_r[k], gd.F_tr[k], n);
    const NodeField rhs = curvature(dr_psi_t, gd.psi_r[k]) + curvature(gd.psi_t[k], gd.psi_s[k]);
    accumulate(rep.entries["sdivFs.t"], g, lhs - rhs, div);
  }
  return rep;
}

std::vector<NodeField> wave_tension(const GaugeWindow& w) {
  require_time(w);
  const GaugeData& gd = w.center;
  const RadialGrid& g = *gd.grid;
  const double dm1 = g.d - 1;
  std::vector<NodeField> out;
  out.reserve(gd.levels());
  for (std::size_t k = 0; k < gd.levels(); ++k) {
    const NodeField dt_psi_t = (w.next.psi_t[k] - w.prev.psi_t[k]) / (2.0 * w.dt);
    const NodeField time_part = dt_psi_t + act(gd.A_t[k], gd.psi_t[k]);
    const NodeField space_part = covariant_r(gd, k, gd.psi_r[k], Parity::odd) +
                                 scale_by(g, gd.psi_r[k], [&](std::size_t j) { return dm1 * g.coth[j]; });
    out.push_back(space_part - time_part);
  }
  return out;
}

ResidualReport dynamic_residuals(const GaugeWindow& w) {
  return dynamic_residuals(w, w.center.grid->d - 1);
}

ResidualReport dynamic_residuals(const GaugeWindow& w, double shift) {
  require_time(w);
  const GaugeData& gd = w.center;
  const RadialGrid& g = *gd.grid;
  const double dm1 = g.d - 1;
  ResidualReport rep;
  stamp(rep, gd);
  rep.parameters["shift"] = shift;
  const auto tension = wave_tension(w);

  auto dt_covariant_psi_s = [&](const GaugeData& x, std::size_t k) {
    return NodeField(x.dt_psi_s[k] + act(x.A_t[k], x.psi_s[k]));
  };

  for (std::size_t k = 0; k < gd.levels(); ++k) {
    const NodeField dr_psi_s = covariant_r(gd, k, gd.psi_s[k], Parity::even);
    const NodeField box_psi_s = scalar_box(gd, k, dr_psi_s);
    const NodeField ds_psi_s = d_s(gd.psi_s, gd.s_levels, k);
    accumulate(rep.entries["psh"], g, ds_psi_s - box_psi_s - act(gd.F_sr[k], gd.psi_r[k]), ds_psi_s);

    const NodeField dr_psi_t = covariant_r(gd, k, gd.psi_t[k], Parity::even);
    const NodeField ds_psi_t = d_s(gd.psi_t, gd.s_levels, k);
    accumulate(rep.entries["pth"], g, ds_psi_t - scalar_box(gd, k, dr_psi_t) - act(gd.F_tr[k], gd.psi_r[k]),
               ds_psi_t);

    // Radial component of the rough Laplacian of the 1-form psi_r dr.
    const NodeField dr_psi_r = covariant_r(gd, k, gd.psi_r[k], Parity::odd);
    const NodeField rough = d_r(g, dr_psi_r, Parity::even) + act(gd.A_r[k], dr_psi_r) +
                            scale_by(g, dr_psi_r, [&](std::size_t j) { return dm1 * g.coth[j]; }) -
                            scale_by(g, gd.psi_r[k], [&](std::size_t j) { return dm1 * g.coth[j] * g.coth[j]; });
    const NodeField ds_psi_r = d_s(gd.psi_r, gd.s_levels, k);
    accumulate(rep.entries["pxh"], g, ds_psi_r - rough - shift * gd.psi_r[k], ds_psi_r);

    const NodeField dtdt = (dt_covariant_psi_s(w.next, k) - dt_covariant_psi_s(w.prev, k)) / (2.0 * w.dt) +
                           act(gd.A_t[k], dt_covariant_psi_s(gd, k));
    const NodeField ds_w = d_s(tension, gd.s_levels, k);
    const NodeField wave_box = box_psi_s - dtdt;
    const NodeField res = wave_box - ds_w - act(gd.F_st[k], gd.psi_t[k]) + act(gd.F_sr[k], gd.psi_r[k]);
    accumulate(rep.entries["wmp"], g, res, wave_box);
  }

  ResidualEntry& w0 = rep.entries["w0"];
  NodeField spatial = covariant_r(gd, 0, gd.psi_r[0], Parity::odd) +
                      scale_by(g, gd.psi_r[0], [&](std::size_t j) { return dm1 * g.coth[j]; });
  accumulate(w0, g, tension[0], spatial);
  return rep;
}

}  // namespace calwave
