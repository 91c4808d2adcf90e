#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace calwave {

enum class Parity { even, odd };

/// Uniform radial grid on H^d with nodes h, 2h, ..., r_max.
///
/// Besides the quadrature weights the grid caches the stencil coefficients
/// used by the radial operators:
///  - `even_flux[j]` couples nodes j and j+1 in the scalar Laplacian. The
///    fluxes are fixed by requiring the discrete divergence theorem to hold
///    exactly for cosh r, which keeps the operator symmetric in the weighted
///    inner product and second order up to the origin.
///  - `odd_up[j]`, `odd_down[j]` are sinh^{d-1} ratios for the divergence form
///    of the odd operator f'' + (d-1) coth f' - f / sinh^2.
struct RadialGrid {
  int d = 2;
  double r_max = 0.0;
  double h = 0.0;
  double sphere_area = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::vector<double> even_flux;
  std::vector<double> odd_up;
  std::vector<double> odd_down;
  std::vector<double> coth;
  std::vector<double> inv_sinh2;

  std::size_t size() const { return nodes.size(); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

RadialGrid build_radial_grid(int d, double r_max, int n);
GridPtr make_grid(int d, double r_max, int n);

struct ScalarField {
  std::vector<double> values;
  Parity parity = Parity::even;
};

ScalarField laplacian_radial(const RadialGrid& grid, const ScalarField& f);

/// f'' + (d-1) coth f' - f / sinh^2 on an odd field: the radial part of the
/// Laplacian acting on a field of angular winding one.
ScalarField equivariant_laplacian(const RadialGrid& grid, const ScalarField& f);

/// First radial derivative with parity ghosts at the origin and a one-sided
/// closure at r_max. The result has the opposite parity.
ScalarField radial_derivative(const RadialGrid& grid, const ScalarField& f);

/// Pass p = infinity for the sup norm.
double lp_norm(const RadialGrid& grid, const ScalarField& f, double p);
double sobolev_norm(const RadialGrid& grid, const ScalarField& f, int k);
double rayleigh_quotient(const RadialGrid& grid, const ScalarField& f);

/// Discrete Dirichlet form paired with laplacian_radial: equals -<Lap f, f>
/// for fields that vanish near r_max.
double dirichlet_form(const RadialGrid& grid, const ScalarField& f);

double weighted_inner(const RadialGrid& grid, const std::vector<double>& f,
                      const std::vector<double>& g);

/// Named nonnegative finite values.
class NormReport {
 public:
  void set(const std::string& label, double value);
  double at(const std::string& label) const;
  bool contains(const std::string& label) const { return values_.count(label) != 0; }
  const std::map<std::string, double>& entries() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Largest Gershgorin row bound over the even and odd radial operators.
double stiffness_bound(const RadialGrid& grid);

template <class Fn>
ScalarField sample_field(const RadialGrid& grid, Parity parity, Fn&& fn) {
  ScalarField out;
  out.parity = parity;
  out.values.reserve(grid.size());
  for (double r : grid.nodes) out.values.push_back(fn(r));
  return out;
}

}  // namespace calwave
