#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calwave/heat_flow.hpp"

namespace calwave {

using Mat = Eigen::MatrixXd;

/// Per-node field of small vectors or matrices: one column per grid node.
/// Vector fields have `dim` rows; matrix fields have dim*dim rows holding
/// the matrix in column-major order.
using NodeField = Eigen::MatrixXd;

/// Tangent frames e_1..e_n per ladder level and node. Column j of
/// `levels[k]` is the ambient x dim frame at node j, column-major.
struct FrameField {
  int ambient = 3;
  int dim = 2;
  std::size_t nodes = 0;
  std::vector<Mat> levels;
  /// d/ds of the frame at each level, read off the transport equation.
  std::vector<Mat> s_derivative;
  int reorthonormalizations = 0;
  double max_drift = 0.0;

  Mat frame(std::size_t k, std::size_t j) const;
  void set_frame(std::size_t k, std::size_t j, const Mat& e);
  Mat derivative(std::size_t k, std::size_t j) const;
};

/// Gram-Schmidt of the seed vectors (then the ambient axes) projected to
/// the tangent space, skipping projections shorter than 1e-6. The frame is
/// oriented so that det[e_1 .. e_n, u] > 0.
FrameField initial_frame(const ExtrinsicMapState& state, const std::vector<Vec>& seeds = {});

/// RK4 transport of frame0 along the heat flow, de/ds = -<e, du/ds> u,
/// replaying the resolution's substeps with Hermite interpolation of u.
FrameField transport_frame(const HeatResolution& res, const FrameField& frame0);

/// Rotates every node's frame by the s-independent B in SO(n) that aligns
/// the top level with e_infty parallel-transported to u(s_max).
FrameField apply_limiting_gauge(const FrameField& frames, const HeatResolution& res,
                                const Mat& e_infty);

/// Standard frame at u: the first n ambient axes made tangent and oriented.
Mat default_limit_frame(const Vec& u_infty);

double orthonormality_error(const FrameField& frames);
double tangency_error(const FrameField& frames, const HeatResolution& res);

/// One heat-resolved time slice with its caloric frames.
struct CaloricSlice {
  HeatResolution res;
  FrameField frames;
};

struct GaugeData {
  GridPtr grid;
  int dim = 2;
  std::vector<double> s_levels;
  bool has_time = false;
  double dt = 0.0;

  std::vector<NodeField> psi_s, psi_r, psi_t;
  std::vector<NodeField> A_s, A_r, A_t;
  std::vector<NodeField> F_sr, F_st, F_tr;
  std::vector<NodeField> dt_psi_s, dt_psi_r, dt_A_r;

  /// Largest symmetric part seen in the raw A matrices before they were
  /// antisymmetrized.
  double max_raw_symmetric = 0.0;
  /// Largest |e psi_s - du/ds| over levels and nodes.
  double tension_consistency = 0.0;

  std::size_t levels() const { return s_levels.size(); }
};

/// Spatial-only data when prev/next are null; otherwise time quantities come
/// from centered differences with spacing dt.
GaugeData compute_gauge_data(const CaloricSlice& center, const CaloricSlice* prev = nullptr,
                             const CaloricSlice* next = nullptr, double dt = 0.0);

/// Three consecutive gauge slices; supplies second time differences.
struct GaugeWindow {
  const GaugeData& prev;
  const GaugeData& center;
  const GaugeData& next;
  double dt;
};

struct ResidualEntry {
  double l2 = 0.0;
  double linf = 0.0;
  double scale_l2 = 0.0;
  double scale_linf = 0.0;
  std::vector<double> per_level;

  double relative_l2() const { return scale_l2 > 0.0 ? l2 / scale_l2 : l2; }
  double relative_linf() const { return scale_linf > 0.0 ? linf / scale_linf : linf; }
};

struct ResidualReport {
  std::map<std::string, ResidualEntry> entries;
  std::map<std::string, double> parameters;

  const ResidualEntry& at(const std::string& label) const;
};

ResidualReport verify_reconstruction(const GaugeData& gd);
ResidualReport verify_structure(const GaugeData& gd);
ResidualReport verify_structure(const GaugeWindow& w);

/// w = -D_t psi_t + D^a psi_a per level.
std::vector<NodeField> wave_tension(const GaugeWindow& w);

/// Curvature shift defaults to d - 1.
ResidualReport dynamic_residuals(const GaugeWindow& w, double shift);
ResidualReport dynamic_residuals(const GaugeWindow& w);

/// Applies a constant rotation B to every frame, i.e. e -> e B.
FrameField rotate_gauge(const FrameField& frames, const Mat& rotation);

}  // namespace calwave
