#pragma once

#include <vector>

#include "calwave/geometry.hpp"

// Per-node stencil kernels. The default versions are OpenMP-parallel over
// nodes; the `reference` versions are plain serial loops with identical
// arithmetic and serve as the testing and benchmarking baseline.
namespace calwave::kernels {

void even_laplacian(const RadialGrid& grid, const double* f, double* out);
void odd_laplacian(const RadialGrid& grid, const double* f, double* out);

namespace reference {
void even_laplacian(const RadialGrid& grid, const double* f, double* out);
void odd_laplacian(const RadialGrid& grid, const double* f, double* out);
}  // namespace reference

/// One-sided second-order value of f'' + (d-1) coth f' + c f / sinh^2 at
/// the outer node.
double outer_closure(const RadialGrid& grid, const double* f, double angular);

/// Rows of the even or odd radial operator as a tridiagonal matrix. The
/// outer row is left empty so that implicit solves keep r_max pinned.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
};

Tridiagonal operator_rows(const RadialGrid& grid, Parity parity);

/// Solves (I - alpha * L) x = rhs in place by forward elimination.
void solve_shifted(const Tridiagonal& rows, double alpha, std::vector<double>& rhs);

}  // namespace calwave::kernels
