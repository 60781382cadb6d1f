#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "dendrite/bdf1.hpp"
#include "dendrite/bdf2.hpp"
#include "dendrite/elliptic.hpp"
#include "dendrite/model.hpp"

using namespace dendrite;

namespace {

GridSpec square(int n) { return GridSpec::make(n, n, -1.0, 1.0, -1.0, 1.0); }

ScalarField noise(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = dist(rng);
  return f;
}

ScalarField disc(const GridSpec& g) {
  return ScalarField::from_function(g, [](double x, double y) { return std::tanh((0.25 - x * x - y * y) / 0.1); });
}

ModelParams params() {
  ModelParams p;
  p.mobility = Mobility::constant(1e3);
  p.eps = 0.1;
  p.sigma = 0.05;
  p.lambda = 1.0;
  p.diff = 5e-2;
  p.latent = 0.1;
  p.s1 = 0.9;
  p.s2 = 10.0;
  p.bconst = 5e3;
  return p;
}

void BM_HelmholtzSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = square(n);
  const ScalarField rhs = noise(g, 1);
  for (auto _ : state) {
    ScalarField u = helmholtz_solve(2.0, 0.01, rhs);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_HelmholtzSolve)->RangeMultiplier(2)->Range(32, 512)->Unit(benchmark::kMicrosecond);

void BM_VariableHelmholtzSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = square(n);
  const ScalarField rhs = noise(g, 2);
  const ScalarField c = ScalarField::from_function(g, [](double x, double y) { return 1.0 + 0.5 * x * x + 0.3 * y; });
  int iterations = 0;
  for (auto _ : state) {
    CgResult r = variable_helmholtz_solve(c, 0.01, rhs);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.u.data());
  }
  state.counters["cg_iterations"] = iterations;
}
BENCHMARK(BM_VariableHelmholtzSolve)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMicrosecond);

void BM_AnisotropicResidual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = square(n);
  const ScalarField phi = disc(g);
  const ModelParams p = params();
  for (auto _ : state) {
    ScalarField r = stabilized_residual(phi, p);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_AnisotropicResidual)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMicrosecond);

void BM_FirstOrderStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = square(n);
  const ScalarField phi = disc(g);
  ScalarField temp = phi;
  temp *= -0.5;
  const ModelParams p = params();
  const bdf1::State s = bdf1::init_state(phi, temp, p);
  StepOptions opts;
  opts.check_identity = false;
  opts.parallel = state.range(1) != 0;
  for (auto _ : state) {
    auto next = bdf1::step(s, 1e-3, p, {}, opts);
    benchmark::DoNotOptimize(next.first.phi.data());
  }
}
BENCHMARK(BM_FirstOrderStep)->ArgsProduct({{64, 128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SecondOrderStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = square(n);
  const ScalarField phi = disc(g);
  ScalarField temp = phi;
  temp *= -0.5;
  const ModelParams p = params();
  StepOptions opts;
  opts.check_identity = state.range(1) != 0;
  const bdf2::State s = bdf2::bootstrap(phi, temp, 1e-3, p, {}, opts).state;
  for (auto _ : state) {
    auto next = bdf2::step(s, 1e-3, p, {}, opts);
    benchmark::DoNotOptimize(next.first.phi_n.data());
  }
}
BENCHMARK(BM_SecondOrderStep)->ArgsProduct({{64, 128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
