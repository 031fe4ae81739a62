#include <benchmark/benchmark.h>

#include "atomkit/apps.hpp"
#include "atomkit/atomic_sets.hpp"
#include "atomkit/solvers.hpp"

using namespace atomkit;

static void MatCompPrimal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  MatCompInstance inst = gen_matcomp_instance(n, n, 0.10, 0.1, 7);
  LinearOperator op = mask_operator(inst.omega);
  Dense b = inst.b.values_vector();
  AtomicSetPtr ball = nuclear_ball(n, n);
  SmoothObjective obj = least_squares_objective(op, b);
  CGOptions opts;
  opts.tau = matcomp_planted_nuclear_norm(inst);
  opts.eps = 0.0;
  opts.max_iter = 10;
  for (auto _ : state) {
    PrimalResult res = primal_cg(obj, *ball, opts);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(MatCompPrimal)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void MatCompDual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  MatCompInstance inst = gen_matcomp_instance(n, n, 0.10, 0.1, 7);
  LinearOperator op = mask_operator(inst.omega);
  Dense b = inst.b.values_vector();
  AtomicSetPtr ball = nuclear_ball(n, n);
  CGOptions opts;
  opts.tau = matcomp_planted_nuclear_norm(inst);
  opts.eps = 0.0;
  opts.max_iter = 10;
  for (auto _ : state) {
    DualResult res = dual_cg_least_squares(op, b, *ball, opts);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(MatCompDual)->Arg(50)->Arg(100)->Arg(250)->Unit(benchmark::kMillisecond);

static void DemixStageOne(benchmark::State& state) {
  DemixInstance inst = gen_demix_instance(static_cast<int>(state.range(0)), 0.02, 2, 0.02, 3);
  for (auto _ : state) {
    DemixResult res = run_mca_demix(inst, -1.0, 20);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(DemixStageOne)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
