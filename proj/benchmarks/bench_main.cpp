#include <benchmark/benchmark.h>

#include <random>

#include "eulergel/audit.hpp"
#include "eulergel/material.hpp"
#include "eulergel/solver.hpp"
#include "eulergel/transport.hpp"

using namespace eulergel;

namespace {

Tensor2 sample_deformation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  Tensor2 f = Tensor2::identity(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) f(i, j) += u(rng);
  return f;
}

Scenario wavy(int degree) {
  Scenario sc;
  sc.box.dim = 2;
  sc.degree_v = degree;
  sc.degree_z = degree;
  sc.dt = 1e-3;
  const double pi = std::acos(-1.0);
  sc.initial.velocity = [pi](const Vec& x) {
    return Vec{0.05 * std::pow(std::sin(pi * x[0]), 2) * std::sin(2 * pi * x[1]),
               -0.05 * std::sin(2 * pi * x[0]) * std::pow(std::sin(pi * x[1]), 2)};
  };
  sc.initial.content = [pi](const Vec& x) {
    return 0.5 + 0.1 * std::cos(pi * x[0]) * std::cos(pi * x[1]);
  };
  return sc;
}

}  // namespace

static void BM_ConstitutiveResponse(benchmark::State& state) {
  std::mt19937_64 rng(1);
  MaterialModel m;
  Regularization reg;
  std::vector<Tensor2> fs;
  for (int k = 0; k < 256; ++k) fs.push_back(sample_deformation(rng));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regularized_response(m, fs[k++ % fs.size()], 0.4, reg, true));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ConstitutiveResponse);

static void BM_SolverSetup(benchmark::State& state) {
  const Scenario sc = wavy(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Solver solver(sc);
    benchmark::DoNotOptimize(solver.grid().size());
  }
}
BENCHMARK(BM_SolverSetup)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_TransportStep(benchmark::State& state) {
  const Solver solver(wavy(static_cast<int>(state.range(0))));
  const FieldState st = solver.initial_state();
  const VelocitySample vel = solver.sample_velocity(st.v);
  const Transport tr(solver.grid());
  for (auto _ : state) {
    TransportState ts = st.transport;
    benchmark::DoNotOptimize(tr.advance(ts, vel, 1e-3, {}));
  }
}
BENCHMARK(BM_TransportStep)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_SolverStep(benchmark::State& state) {
  const Solver solver(wavy(static_cast<int>(state.range(0))));
  const FieldState st0 = solver.initial_state();
  for (auto _ : state) {
    FieldState st = st0;
    benchmark::DoNotOptimize(solver.step(st, 1e-3));
  }
}
BENCHMARK(BM_SolverStep)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_LedgerRecord(benchmark::State& state) {
  const Solver solver(wavy(8));
  const FieldState st = solver.initial_state();
  for (auto _ : state) benchmark::DoNotOptimize(record(solver, st));
}
BENCHMARK(BM_LedgerRecord)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
