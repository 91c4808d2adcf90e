#include "calwave/kernels.hpp"

namespace calwave::kernels {

namespace {

inline double even_row(const RadialGrid& g, const double* f, std::size_t j) {
  const double up = g.even_flux[j] * (f[j + 1] - f[j]);
  const double down = j == 0 ? 0.0 : g.even_flux[j - 1] * (f[j] - f[j - 1]);
  return (up - down) / g.weights[j];
}

inline double odd_row(const RadialGrid& g, const double* f, std::size_t j) {
  const double q_up = g.odd_up[j + 1] * f[j + 1] - g.odd_down[j + 1] * f[j];
  const double q_down = g.odd_up[j] * f[j] - (j == 0 ? 0.0 : g.odd_down[j] * f[j - 1]);
  return (q_up - q_down) / (g.h * g.h) + (g.d - 2) * f[j] * g.inv_sinh2[j];
}

}  // namespace

double outer_closure(const RadialGrid& g, const double* f, double angular) {
  const std::size_t n = g.size();
  const std::size_t j = n - 1;
  const double h = g.h;
  const double f2 = (2.0 * f[j] - 5.0 * f[j - 1] + 4.0 * f[j - 2] - f[j - 3]) / (h * h);
  const double f1 = (3.0 * f[j] - 4.0 * f[j - 1] + f[j - 2]) / (2.0 * h);
  return f2 + (g.d - 1) * g.coth[j] * f1 + angular * f[j] * g.inv_sinh2[j];
}

void even_laplacian(const RadialGrid& g, const double* f, double* out) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n - 1; ++j) out[j] = even_row(g, f, static_cast<std::size_t>(j));
  out[n - 1] = outer_closure(g, f, 0.0);
}

void odd_laplacian(const RadialGrid& g, const double* f, double* out) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n - 1; ++j) out[j] = odd_row(g, f, static_cast<std::size_t>(j));
  out[n - 1] = outer_closure(g, f, -1.0);
}

Tridiagonal operator_rows(const RadialGrid& g, Parity parity) {
  const std::size_t n = g.size();
  Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0)};
  const double h2 = g.h * g.h;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (parity == Parity::even) {
      const double up = g.even_flux[j] / g.weights[j];
      const double down = j == 0 ? 0.0 : g.even_flux[j - 1] / g.weights[j];
      t.upper[j] = up;
      t.lower[j] = down;
      t.diag[j] = -(up + down);
    } else {
      t.upper[j] = g.odd_up[j + 1] / h2;
      t.lower[j] = j == 0 ? 0.0 : g.odd_down[j] / h2;
      t.diag[j] = -(g.odd_down[j + 1] + g.odd_up[j]) / h2 + (g.d - 2) * g.inv_sinh2[j];
    }
  }
  return t;
}

void solve_shifted(const Tridiagonal& t, double alpha, std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> c(n, 0.0);
  double b = 1.0 - alpha * t.diag[0];
  c[0] = -alpha * t.upper[0] / b;
  x[0] /= b;
  for (std::size_t j = 1; j < n; ++j) {
    const double a = -alpha * t.lower[j];
    b = 1.0 - alpha * t.diag[j] - a * c[j - 1];
    c[j] = -alpha * t.upper[j] / b;
    x[j] = (x[j] - a * x[j - 1]) / b;
  }
  for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];
}

namespace reference {

void even_laplacian(const RadialGrid& g, const double* f, double* out) {
  const std::size_t n = g.size();
  for (std::size_t j = 0; j + 1 < n; ++j) out[j] = even_row(g, f, j);
  out[n - 1] = outer_closure(g, f, 0.0);
}

void odd_laplacian(const RadialGrid& g, const double* f, double* out) {
  const std::size_t n = g.size();
  for (std::size_t j = 0; j + 1 < n; ++j) out[j] = odd_row(g, f, j);
  out[n - 1] = outer_closure(g, f, -1.0);
}

}  // namespace reference

}  // namespace calwave::kernels
