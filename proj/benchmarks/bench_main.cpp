#include "spme/generator.hpp"
#include "spme/ldp.hpp"
#include "spme/skeleton.hpp"
#include "spme/spde.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace spme;

namespace {

SpectralGenerator laplacian(std::size_t n) {
  return SpectralGenerator::periodic_laplacian(MeasureGrid::periodic1d(n, 2.0 * std::numbers::pi));
}

Field sine(const GridPtr& grid) {
  Eigen::VectorXd v = grid->labels()->array().sin();
  return Field(grid, v);
}

Model model(const SpectralGenerator& g, Nonlinearity psi) {
  return {std::move(psi), NoiseCoefficient(TripleContext(g), {.c0 = 1.0, .c1 = 0.5, .c2 = 0.5, .gamma = 0.5}, 1.0)};
}

void BM_EigenSetup(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto grid = MeasureGrid::periodic1d(n, 2.0 * std::numbers::pi);
  for (auto _ : state) benchmark::DoNotOptimize(SpectralGenerator::periodic_laplacian(grid));
}
BENCHMARK(BM_EigenSetup)->Arg(64)->Arg(256);

void BM_GammaTransform(benchmark::State& state) {
  const SpectralGenerator g = laplacian(64);
  const Field u = sine(g.grid());
  const double r = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gamma_transform(g, r, u));
}
BENCHMARK(BM_GammaTransform)->Arg(1)->Arg(3);

// Linear Psi takes the diagonal path, atan goes through Newton.
void BM_SkeletonPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SpectralGenerator g = laplacian(n);
  const Model m = model(g, state.range(1) ? Nonlinearity::atan_saturated(1.0) : Nonlinearity::linear(1.0));
  const Field x = sine(g.grid());
  const Control h = Control::zero(g.grid(), 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_skeleton(m, h, x, 256));
}
BENCHMARK(BM_SkeletonPath)->Args({32, 0})->Args({32, 1})->Args({64, 1})->Unit(benchmark::kMillisecond);

void BM_SdeSample(benchmark::State& state) {
  const SpectralGenerator g = laplacian(32);
  const Model m = model(g, Nonlinearity::linear_plus_atan(1.0, 1.0));
  const Field x = sine(g.grid());
  const Control h = Control::zero(g.grid(), 1.0, 1);
  std::uint64_t sample = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, h, x, 256, 0.01, {.modes = 0, .seed = 1}, sample++));
}
BENCHMARK(BM_SdeSample)->Unit(benchmark::kMillisecond);

void BM_MinimizeAction(benchmark::State& state) {
  const SpectralGenerator g = laplacian(16);
  const Model m{Nonlinearity::linear(1.0),
                NoiseCoefficient(TripleContext(g), {.c0 = 1.0, .c1 = 0.0, .c2 = 0.0, .gamma = 1.0, .beta = 0.0}, 1.0)};
  const Field x = sine(g.grid());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(16);
  c.head(3) << 0.5, -0.3, 0.2;
  const Field target = solve_skeleton(m, Control::zero(g.grid(), 1.0, 1), x, 64).final_state() + g.synthesize(c);
  const RateProblem p{.model = m, .x = x, .steps = 64, .target = target, .terminal_tol = 1e-3,
                      .control_modes = 3, .control_cells = 8};
  for (auto _ : state) benchmark::DoNotOptimize(minimize_action(p));
}
BENCHMARK(BM_MinimizeAction)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
