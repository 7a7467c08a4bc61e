// Serial reference against OpenMP for the data-parallel kernels.
// Argument 0 selects the serial path, 1 the OpenMP path.

#include <benchmark/benchmark.h>

#include "finsler/berwald.hpp"
#include "finsler/calculus.hpp"
#include "finsler/detail/kernels.hpp"
#include "finsler/harmonic.hpp"

using namespace finsler;

namespace {

MetricSpec randers_x() {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 1) = 0.1;
  Vector b(2);
  b << 0.3, 0.0;
  return MetricSpec::randers(2, MatrixField::constant(Matrix::Identity(2, 2)), CovectorField::affine(b, s));
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_CellFluxes(benchmark::State& state) {
  const DirichletProblem p(randers_x(), VolumeForm::lebesgue(), Grid::ball(1.0, 1.0 / 32), 0.2);
  std::vector<double> u(p.grid().node_count());
  for (int k = 0; k < p.grid().node_count(); ++k) u[k] = p.grid().points()[k][0] + 0.1 * p.grid().points()[k][1];
  std::vector<detail::CellFlux> cells;
  for (auto _ : state) {
    detail::cell_fluxes(p, u, state.range(1) != 0, mode(state), cells);
    benchmark::DoNotOptimize(cells.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(p.geometry().size()));
}
BENCHMARK(BM_CellFluxes)->ArgsProduct({{0, 1}, {0, 1}})->ArgNames({"omp", "hessian"})->Unit(benchmark::kMillisecond);

void BM_SolveDirichlet(benchmark::State& state) {
  const DirichletProblem p(randers_x(), VolumeForm::lebesgue(), Grid::ball(1.0, 1.0 / 16), 0.2);
  SolverOptions o;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dirichlet(p, ScalarFunction::coordinate(0, 2), o).energy);
}
BENCHMARK(BM_SolveDirichlet)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

void BM_StructureConditions(benchmark::State& state) {
  const auto spec = randers_x();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        verify_structure_conditions(spec, VolumeForm::lebesgue(), Box::cube(2, 0.5), 2000, 1, mode(state)).c);
}
BENCHMARK(BM_StructureConditions)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

void BM_DirichletEnergy(benchmark::State& state) {
  const auto spec = randers_x();
  const auto f = ScalarFunction::harmonic_exp(1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        dirichlet_energy(spec, VolumeForm::lebesgue(), f, Box::cube(2, 0.5), 16, mode(state)).value);
}
BENCHMARK(BM_DirichletEnergy)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

void BM_IsBerwald(benchmark::State& state) {
  const auto spec = randers_x();
  for (auto _ : state)
    benchmark::DoNotOptimize(is_berwald(spec, Box::cube(2, 0.5), 1e-7, 40, 1, mode(state)).max_nonlinearity);
}
BENCHMARK(BM_IsBerwald)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
