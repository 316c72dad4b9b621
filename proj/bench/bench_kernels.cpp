#include "fsplab/exact.hpp"
#include "fsplab/fluid2d.hpp"
#include "fsplab/plaplace.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace fsp;

namespace {

ScalarField barenblatt_field(int dim, int cells) {
  const GridSpec g = dim == 1 ? GridSpec::line(-6.0, 6.0, cells, Boundary::dirichlet_zero)
                              : GridSpec::square(-6.0, 6.0, cells, Boundary::dirichlet_zero);
  return sample_barenblatt(g, make_barenblatt(3.0, dim, 1.0, 1.0), 2.0);
}

SolverConfig scalar_cfg(int dim) {
  SolverConfig c;
  c.params = {3.0, 1.0, dim};
  return c;
}

VectorField vortex(int cells) {
  const GridSpec g = GridSpec::square(0.0, 2.0 * std::numbers::pi, cells, Boundary::periodic);
  return sample_taylor_green(g, 1.0, 0.0);
}

void BM_operator_omp(benchmark::State& st) {
  const int dim = static_cast<int>(st.range(0)), cells = static_cast<int>(st.range(1));
  const auto u = barenblatt_field(dim, cells);
  const auto cfg = scalar_cfg(dim);
  for (auto _ : st) benchmark::DoNotOptimize(apply_operator(u, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(u.size()));
}

void BM_operator_serial(benchmark::State& st) {
  const int dim = static_cast<int>(st.range(0)), cells = static_cast<int>(st.range(1));
  const auto u = barenblatt_field(dim, cells);
  const auto cfg = scalar_cfg(dim);
  for (auto _ : st) benchmark::DoNotOptimize(reference::apply_operator(u, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(u.size()));
}

void BM_energy_omp(benchmark::State& st) {
  const auto u = barenblatt_field(2, static_cast<int>(st.range(0)));
  const auto cfg = scalar_cfg(2);
  for (auto _ : st) benchmark::DoNotOptimize(dirichlet_energy(u, cfg));
}

void BM_energy_serial(benchmark::State& st) {
  const auto u = barenblatt_field(2, static_cast<int>(st.range(0)));
  const auto cfg = scalar_cfg(2);
  for (auto _ : st) benchmark::DoNotOptimize(reference::dirichlet_energy(u, cfg));
}

void BM_viscous_omp(benchmark::State& st) {
  const auto v = vortex(static_cast<int>(st.range(0)));
  FluidConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(viscous_term(v, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(v.size()));
}

void BM_viscous_serial(benchmark::State& st) {
  const auto v = vortex(static_cast<int>(st.range(0)));
  FluidConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(reference::viscous_term(v, cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(v.size()));
}

} // namespace

BENCHMARK(BM_operator_omp)->Args({1, 8192})->Args({2, 256})->Args({2, 512})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_operator_serial)->Args({1, 8192})->Args({2, 256})->Args({2, 512})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_energy_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_energy_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_viscous_omp)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_viscous_serial)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
