#include "calwave/caloric_gauge.hpp"

#include <algorithm>
#include <cmath>

#include "calwave/error.hpp"

namespace calwave {

namespace {

constexpr double kSeedFloor = 1e-6;
constexpr double kDriftRepair = 1e-8;
constexpr double kDriftFatal = 1e-4;
constexpr double kReplayTol = 1e-12;

Mat node_vectors(const std::vector<double>& comps, int ambient, std::size_t n) {
  Mat out(ambient, n);
  for (int c = 0; c < ambient; ++c)
    for (std::size_t j = 0; j < n; ++j) out(c, j) = comps[c * n + j];
  return out;
}

double frame_drift(const Mat& e) {
  return (e.transpose() * e - Mat::Identity(e.cols(), e.cols())).cwiseAbs().maxCoeff();
}

// Nearest orthonormal tangent frame: drop the normal part, then apply the
// inverse square root of the Gram matrix.
Mat repair_frame(const Mat& e, const Vec& u) {
  Mat t = e - u * (u.transpose() * e);
  Eigen::SelfAdjointEigenSolver<Mat> eig(t.transpose() * t);
  const Mat inv_sqrt = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                       eig.eigenvectors().transpose();
  return t * inv_sqrt;
}

// Rotation of the ambient space taking a to b that fixes their orthogonal
// complement; on tangent vectors it is parallel transport along the geodesic.
Mat geodesic_transport(const Vec& a, const Vec& b) {
  const double c = a.dot(b);
  if (c <= -1.0 + 1e-12)
    throw Error(ErrorKind::degenerate, "limit point is antipodal to u_infty", "u_infty");
  const Mat k = b * a.transpose() - a * b.transpose();
  return Mat::Identity(a.size(), a.size()) + k + k * k / (1.0 + c);
}

}  // namespace

Mat FrameField::frame(std::size_t k, std::size_t j) const {
  return Eigen::Map<const Mat>(levels[k].col(j).data(), ambient, dim);
}

void FrameField::set_frame(std::size_t k, std::size_t j, const Mat& e) {
  Eigen::Map<Mat>(levels[k].col(j).data(), ambient, dim) = e;
}

Mat FrameField::derivative(std::size_t k, std::size_t j) const {
  return Eigen::Map<const Mat>(s_derivative[k].col(j).data(), ambient, dim);
}

Mat default_limit_frame(const Vec& u_infty) {
  const int ambient = static_cast<int>(u_infty.size());
  const Vec u = project_to_sphere(u_infty);
  Mat e(ambient, ambient - 1);
  int filled = 0;
  for (int axis = 0; axis < ambient && filled < ambient - 1; ++axis) {
    Vec v = Vec::Unit(ambient, axis);
    v -= v.dot(u) * u;
    for (int i = 0; i < filled; ++i) v -= v.dot(e.col(i)) * e.col(i);
    if (v.norm() < kSeedFloor) continue;
    e.col(filled++) = v.normalized();
  }
  Mat full(ambient, ambient);
  full << e, u;
  if (full.determinant() < 0.0) e.col(ambient - 2) *= -1.0;
  return e;
}

FrameField initial_frame(const ExtrinsicMapState& state, const std::vector<Vec>& seeds) {
  const int ambient = state.ambient();
  const int dim = state.target_dim;
  std::vector<Vec> candidates;
  for (const auto& s : seeds) {
    if (s.size() != ambient) throw Error(ErrorKind::invalid_configuration, "seed has the wrong size", "seeds");
    candidates.push_back(s);
  }
  for (int axis = 0; axis < ambient; ++axis) candidates.push_back(Vec::Unit(ambient, axis));

  FrameField f;
  f.ambient = ambient;
  f.dim = dim;
  f.nodes = state.nodes();
  f.levels.assign(1, Mat(ambient * dim, f.nodes));
  for (std::size_t j = 0; j < f.nodes; ++j) {
    const Vec u = state.node(j);
    Mat e(ambient, dim);
    int filled = 0;
    for (const auto& seed : candidates) {
      if (filled == dim) break;
      Vec v = seed - seed.dot(u) * u;
      for (int i = 0; i < filled; ++i) v -= v.dot(e.col(i)) * e.col(i);
      if (v.norm() < kSeedFloor) continue;
      v.normalize();
      // A second pass keeps the result orthonormal to rounding.
      v -= v.dot(u) * u;
      for (int i = 0; i < filled; ++i) v -= v.dot(e.col(i)) * e.col(i);
      e.col(filled++) = v.normalized();
    }
    if (filled < dim) throw Error(ErrorKind::degenerate, "no usable seed for the frame", "seeds");
    Mat full(ambient, ambient);
    full << e, u;
    if (full.determinant() < 0.0) e.col(dim - 1) *= -1.0;
    f.set_frame(0, j, e);
  }
  return f;
}

FrameField transport_frame(const HeatResolution& res, const FrameField& frame0) {
  const auto& grid_ptr = res.states.front().grid;
  const std::size_t n = grid_ptr->size();
  const int ambient = res.states.front().ambient();
  if (frame0.nodes != n || frame0.ambient != ambient || frame0.levels.empty())
    throw Error(ErrorKind::invalid_configuration, "frame and resolution do not match", "frame");
  const int dim = frame0.dim;
  const std::size_t levels = res.levels();

  FrameField out = frame0;
  out.levels.resize(levels);
  out.s_derivative.assign(levels, Mat::Zero(ambient * dim, n));

  Mat current = frame0.levels.front();

  ExtrinsicMapState u_a = res.states.front();
  auto t_a = heat_tension(u_a);

  for (std::size_t k = 1; k < levels; ++k) {
    const int steps = res.substeps[k];
    const double ds = (res.s_levels[k] - res.s_levels[k - 1]) / steps;
    for (int i = 0; i < steps; ++i) {
      ExtrinsicMapState u_b = step_heat(u_a, ds, res.scheme);
      const auto t_b = heat_tension(u_b);
      const Mat ua = node_vectors(u_a.values, ambient, n);
      const Mat ub = node_vectors(u_b.values, ambient, n);
      const Mat va = node_vectors(t_a, ambient, n);
      const Mat vb = node_vectors(t_b, ambient, n);
      const Mat um = 0.5 * (ua + ub) + ds / 8.0 * (va - vb);
      const Mat vm = 1.5 / ds * (ub - ua) - 0.25 * (va + vb);

      const auto jn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t jj = 0; jj < jn; ++jj) {
        const auto j = static_cast<Eigen::Index>(jj);
        Eigen::Map<Mat> e(current.col(j).data(), ambient, dim);
        auto rhs = [&](const Mat& x, const Mat& u, const Mat& v) -> Mat {
          return -u.col(j) * (v.col(j).transpose() * x);
        };
        const Mat e0 = e;
        const Mat k1 = rhs(e0, ua, va);
        const Mat k2 = rhs(e0 + 0.5 * ds * k1, um, vm);
        const Mat k3 = rhs(e0 + 0.5 * ds * k2, um, vm);
        const Mat k4 = rhs(e0 + ds * k3, ub, vb);
        e = e0 + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      u_a = std::move(u_b);
      t_a = t_b;
    }

    double replay = 0.0;
    for (std::size_t i = 0; i < u_a.values.size(); ++i)
      replay = std::max(replay, std::abs(u_a.values[i] - res.states[k].values[i]));
    if (replay > kReplayTol)
      throw Error(ErrorKind::invalid_configuration, "resolution does not replay deterministically", "res");

    double drift = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Eigen::Map<Mat> e(current.col(static_cast<Eigen::Index>(j)).data(), ambient, dim);
      const Vec u = u_a.node(j);
      drift = std::max({drift, frame_drift(e), (u.transpose() * e).cwiseAbs().maxCoeff()});
    }
    out.max_drift = std::max(out.max_drift, drift);
    if (drift > kDriftFatal)
      throw Error(ErrorKind::transport_instability, "frame transport lost orthonormality", "ds");
    if (drift > kDriftRepair) {
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::Map<Mat> e(current.col(static_cast<Eigen::Index>(j)).data(), ambient, dim);
        e = repair_frame(e, u_a.node(j));
      }
      ++out.reorthonormalizations;
    }
    out.levels[k] = current;
  }

  // d/ds e from the transport equation itself at every stored level.
  for (std::size_t k = 0; k < levels; ++k) {
    const Mat u = node_vectors(res.states[k].values, ambient, n);
    const Mat v = node_vectors(res.tension[k], ambient, n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      const Mat de = -u.col(c) * (v.col(c).transpose() * out.frame(k, j));
      out.s_derivative[k].col(c) = Eigen::Map<const Vec>(de.data(), ambient * dim);
    }
  }
  return out;
}

FrameField apply_limiting_gauge(const FrameField& frames, const HeatResolution& res,
                                const Mat& e_infty) {
  const std::size_t top = frames.levels.size() - 1;
  if (top + 1 != res.levels())
    throw Error(ErrorKind::invalid_configuration, "frame and resolution ladders differ", "frames");
  const Vec u_inf = Eigen::Map<const Vec>(res.states.front().u_infty.data(),
                                          static_cast<Eigen::Index>(res.states.front().u_infty.size()));
  if (e_infty.rows() != frames.ambient || e_infty.cols() != frames.dim)
    throw Error(ErrorKind::invalid_configuration, "limit frame has the wrong shape", "e_infty");

  FrameField out = frames;
  const auto& top_state = res.states[top];
  for (std::size_t j = 0; j < frames.nodes; ++j) {
    const Vec u_top = top_state.node(j);
    const Mat target = geodesic_transport(u_inf, u_top) * e_infty;
    const Mat m = frames.frame(top, j).transpose() * target;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat b = svd.matrixU() * svd.matrixV().transpose();
    if (b.determinant() < 0.0)
      throw Error(ErrorKind::orientation_mismatch, "frames have opposite orientation", "e_infty");
    for (std::size_t k = 0; k <= top; ++k) {
      out.set_frame(k, j, frames.frame(k, j) * b);
      if (!frames.s_derivative.empty()) {
        Eigen::Map<Mat>(out.s_derivative[k].col(static_cast<Eigen::Index>(j)).data(), frames.ambient,
                        frames.dim) = frames.derivative(k, j) * b;
      }
    }
  }
  return out;
}

FrameField rotate_gauge(const FrameField& frames, const Mat& rotation) {
  FrameField out = frames;
  for (std::size_t k = 0; k < frames.levels.size(); ++k) {
    for (std::size_t j = 0; j < frames.nodes; ++j) {
      out.set_frame(k, j, frames.frame(k, j) * rotation);
      if (!frames.s_derivative.empty()) {
        Eigen::Map<Mat>(out.s_derivative[k].col(static_cast<Eigen::Index>(j)).data(), frames.ambient,
                        frames.dim) = frames.derivative(k, j) * rotation;
      }
    }
  }
  return out;
}

double orthonormality_error(const FrameField& frames) {
  double worst = 0.0;
  for (std::size_t k = 0; k < frames.levels.size(); ++k)
    for (std::size_t j = 0; j < frames.nodes; ++j) worst = std::max(worst, frame_drift(frames.frame(k, j)));
  return worst;
}

double tangency_error(const FrameField& frames, const HeatResolution& res) {
  double worst = 0.0;
  for (std::size_t k = 0; k < frames.levels.size(); ++k)
    for (std::size_t j = 0; j < frames.nodes; ++j)
      worst = std::max(worst, (res.states[k].node(j).transpose() * frames.frame(k, j)).cwiseAbs().maxCoeff());
  return worst;
}

namespace {

NodeField radial_derivative_rows(const RadialGrid& g, const Mat& f, Parity parity) {
  NodeField out(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    ScalarField row{std::vector<double>(f.cols()), parity};
    for (Eigen::Index j = 0; j < f.cols(); ++j) row.values[j] = f(r, j);
    const auto d = radial_derivative(g, row);
    for (Eigen::Index j = 0; j < f.cols(); ++j) out(r, j) = d.values[j];
  }
  return out;
}

// Columns of `vec` hold ambient vectors; returns frame coefficients e^T v.
NodeField coefficients(const FrameField& fr, std::size_t k, const Mat& vec) {
  NodeField out(fr.dim, fr.nodes);
  for (std::size_t j = 0; j < fr.nodes; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    out.col(c) = fr.frame(k, j).transpose() * vec.col(c);
  }
  return out;
}

// Raw e^T de per node, antisymmetrized; the symmetric size is tracked.
NodeField connection(const FrameField& fr, std::size_t k, const Mat& de, double& sym) {
  const int n = fr.dim;
  NodeField out(n * n, fr.nodes);
  for (std::size_t j = 0; j < fr.nodes; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const Mat d = Eigen::Map<const Mat>(de.col(c).data(), fr.ambient, n);
    const Mat raw = fr.frame(k, j).transpose() * d;
    sym = std::max(sym, (0.5 * (raw + raw.transpose())).cwiseAbs().maxCoeff());
    const Mat anti = 0.5 * (raw - raw.transpose());
    out.col(c) = Eigen::Map<const Vec>(anti.data(), n * n);
  }
  return out;
}

NodeField curvature_field(const NodeField& x, const NodeField& y) {
  const auto n = x.rows();
  NodeField out(n * n, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Mat r = x.col(j) * y.col(j).transpose() - y.col(j) * x.col(j).transpose();
    out.col(j) = Eigen::Map<const Vec>(r.data(), n * n);
  }
  return out;
}

void require_compatible(const CaloricSlice& a, const CaloricSlice& b) {
  const auto& ga = a.res.grid();
  const auto& gb = b.res.grid();
  if (ga.size() != gb.size() || ga.h != gb.h || ga.d != gb.d)
    throw Error(ErrorKind::invalid_configuration, "slices live on different grids", "grid");
  if (a.res.s_levels != b.res.s_levels)
    throw Error(ErrorKind::invalid_configuration, "slices use different heat ladders", "ladder");
  if (a.frames.levels.size() != a.res.levels() || b.frames.levels.size() != b.res.levels())
    throw Error(ErrorKind::invalid_configuration, "frames do not cover the ladder", "frames");
}

}  // namespace

GaugeData compute_gauge_data(const CaloricSlice& center, const CaloricSlice* prev,
                             const CaloricSlice* next, double dt) {
  const auto& res = center.res;
  const auto& fr = center.frames;
  const RadialGrid& g = res.grid();
  if (res.states.front().winding != 0)
    throw Error(ErrorKind::unsupported_dimension, "gauge data is implemented for radial maps", "winding");
  if (fr.levels.size() != res.levels() || fr.s_derivative.size() != res.levels())
    throw Error(ErrorKind::invalid_configuration, "frames were not transported along this ladder", "frames");
  const bool timed = prev != nullptr && next != nullptr;
  if ((prev != nullptr) != (next != nullptr))
    throw Error(ErrorKind::invalid_configuration, "time stencil needs both neighbours", "t_slices");
  if (timed) {
    require_compatible(center, *prev);
    require_compatible(center, *next);
    if (!(dt > 0.0)) throw Error(ErrorKind::invalid_configuration, "time spacing must be positive", "dt");
  }

  GaugeData gd;
  gd.grid = res.states.front().grid;
  gd.dim = fr.dim;
  gd.s_levels = res.s_levels;
  gd.has_time = timed;
  gd.dt = dt;
  const int ambient = fr.ambient;
  const std::size_t n = fr.nodes;
  const std::size_t levels = res.levels();

  auto spatial = [&](const CaloricSlice& sl, std::size_t k, NodeField& psi_s, NodeField& psi_r,
                     NodeField& a_r, double& sym) {
    const auto& st = sl.res.states[k];
    psi_s = coefficients(sl.frames, k, node_vectors(sl.res.tension[k], ambient, n));
    psi_r = coefficients(sl.frames, k, node_vectors(ambient_radial_derivative(st, st.values), ambient, n));
    a_r = connection(sl.frames, k, radial_derivative_rows(g, sl.frames.levels[k], Parity::even), sym);
  };

  for (std::size_t k = 0; k < levels; ++k) {
    NodeField ps, pr, ar;
    spatial(center, k, ps, pr, ar, gd.max_raw_symmetric);
    gd.psi_s.push_back(ps);
    gd.psi_r.push_back(pr);
    gd.A_r.push_back(ar);
    gd.A_s.push_back(connection(fr, k, fr.s_derivative[k], gd.max_raw_symmetric));
    gd.F_sr.push_back(curvature_field(ps, pr));

    const Mat tens = node_vectors(res.tension[k], ambient, n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      gd.tension_consistency =
          std::max(gd.tension_consistency, (fr.frame(k, j) * ps.col(c) - tens.col(c)).cwiseAbs().maxCoeff());
    }

    if (!timed) continue;
    const Mat u_next = node_vectors(next->res.states[k].values, ambient, n);
    const Mat u_prev = node_vectors(prev->res.states[k].values, ambient, n);
    const NodeField pt = coefficients(fr, k, (u_next - u_prev) / (2.0 * dt));
    const Mat de_t = (next->frames.levels[k] - prev->frames.levels[k]) / (2.0 * dt);
    gd.psi_t.push_back(pt);
    gd.A_t.push_back(connection(fr, k, de_t, gd.max_raw_symmetric));
    gd.F_st.push_back(curvature_field(ps, pt));
    gd.F_tr.push_back(curvature_field(pt, pr));

    NodeField ps_p, pr_p, ar_p, ps_n, pr_n, ar_n;
    double ignore = 0.0;
    spatial(*prev, k, ps_p, pr_p, ar_p, ignore);
    spatial(*next, k, ps_n, pr_n, ar_n, ignore);
    gd.dt_psi_s.push_back((ps_n - ps_p) / (2.0 * dt));
    gd.dt_psi_r.push_back((pr_n - pr_p) / (2.0 * dt));
    gd.dt_A_r.push_back((ar_n - ar_p) / (2.0 * dt));
  }
  return gd;
}

const ResidualEntry& ResidualReport::at(const std::string& label) const {
  auto it = entries.find(label);
  if (it == entries.end()) throw Error(ErrorKind::invalid_parameter, "no such residual", label);
  return it->second;
}

}  // namespace calwave
