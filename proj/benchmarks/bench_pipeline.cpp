#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "optresp/optresp.hpp"

using namespace optresp;

namespace {

void BM_AssemblePM(benchmark::State& state) {
  const Grid g(static_cast<std::size_t>(state.range(0)));
  const MapModel t = pomeau_manneville();
  const NoiseModel rho = bump_noise(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_transfer_matrix(g, t, rho));
}
BENCHMARK(BM_AssemblePM)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_AssembleWithSensitivity(benchmark::State& state) {
  const Grid g(static_cast<std::size_t>(state.range(0)));
  const MapModel t = interval_exchange();
  const NoiseModel rho = bump_noise(std::sqrt(6.0) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_with_sensitivity(g, t, rho));
}
BENCHMARK(BM_AssembleWithSensitivity)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SubdominantEigenpair(benchmark::State& state) {
  const TransferMatrix a = assemble_transfer_matrix(Grid(static_cast<std::size_t>(state.range(0))),
                                                    pomeau_manneville(), bump_noise(0.1));
  for (auto _ : state) benchmark::DoNotOptimize(subdominant_eigenpair(a, EigenSelector::LargestModulusReal));
}
BENCHMARK(BM_SubdominantEigenpair)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_InvariantDensity(benchmark::State& state) {
  const TransferMatrix a = assemble_transfer_matrix(Grid(static_cast<std::size_t>(state.range(0))),
                                                    pomeau_manneville(), bump_noise(0.1));
  for (auto _ : state) benchmark::DoNotOptimize(invariant_density(a));
}
BENCHMARK(BM_InvariantDensity)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_OptimalKernelForExpectation(benchmark::State& state) {
  const TransferMatrix a = assemble_transfer_matrix(Grid(static_cast<std::size_t>(state.range(0))),
                                                    pomeau_manneville(), bump_noise(0.1));
  const ResolventSolver res(a, invariant_density(a));
  const DensityVector c = project_observable(a.grid, [](double x) { return -std::cos(x); });
  const KernelFeasibility feas = KernelFeasibility::from_matrix(a);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_kernel_for_expectation(res, c, feas));
}
BENCHMARK(BM_OptimalKernelForExpectation)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
