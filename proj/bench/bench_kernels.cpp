// OpenMP stencil kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "calwave/geometry.hpp"
#include "calwave/kernels.hpp"

namespace {

struct Fixture {
  calwave::GridPtr grid;
  std::vector<double> f, out;

  explicit Fixture(int n) : grid(calwave::make_grid(4, 8.0, n)), f(grid->size()), out(grid->size()) {
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::exp(-grid->nodes[j] * grid->nodes[j]);
  }
};

template <void (*Kernel)(const calwave::RadialGrid&, const double*, double*)>
void run(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Kernel(*fx.grid, fx.f.data(), fx.out.data());
    benchmark::DoNotOptimize(fx.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvenParallel(benchmark::State& s) { run<calwave::kernels::even_laplacian>(s); }
void BM_EvenSerial(benchmark::State& s) { run<calwave::kernels::reference::even_laplacian>(s); }
void BM_OddParallel(benchmark::State& s) { run<calwave::kernels::odd_laplacian>(s); }
void BM_OddSerial(benchmark::State& s) { run<calwave::kernels::reference::odd_laplacian>(s); }

}  // namespace

BENCHMARK(BM_EvenParallel)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_EvenSerial)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_OddParallel)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_OddSerial)->RangeMultiplier(10)->Range(1000, 1000000);

BENCHMARK_MAIN();
