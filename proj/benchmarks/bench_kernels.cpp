#include <benchmark/benchmark.h>

#include "atomkit/atomic_sets.hpp"
#include "atomkit/linalg.hpp"
#include "atomkit/rng.hpp"

using namespace atomkit;

static void DctForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Dense x = rng.normal_dense(Shape{n, 1});
  for (auto _ : state) {
    Dense y = dct_apply(x, DctDirection::forward);
    benchmark::DoNotOptimize(y);
  }
  state.SetComplexityN(n);
}
BENCHMARK(DctForward)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void TopSingularTriple(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  Dense a = rng.normal_dense(Shape{n, n});
  for (auto _ : state) {
    auto t = top_singular_triples(a, 1, 1e-8, 1000, 7);
    benchmark::DoNotOptimize(t);
  }
  state.SetComplexityN(n);
}
BENCHMARK(TopSingularTriple)->Arg(16)->Arg(64)->Arg(128)->Complexity();

static void NuclearGauge(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  AtomicSetPtr ball = nuclear_ball(n, n);
  Dense x = rng.normal_dense(Shape{n, n});
  for (auto _ : state) benchmark::DoNotOptimize(ball->gauge(x));
}
BENCHMARK(NuclearGauge)->Arg(16)->Arg(32)->Arg(64);

static void SignedBasisExpose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  AtomicSetPtr sb = signed_basis(n);
  Dense z = rng.normal_dense(Shape{n, 1});
  for (auto _ : state) {
    ExposedFace f = sb->expose(z, 4, 1e-9);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(SignedBasisExpose)->Arg(1024)->Arg(16384);

static void TraceCappedPsdProjection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  Dense s = symmetrized(rng.normal_dense(Shape{n, n}));
  for (auto _ : state) {
    Dense p = project_trace_capped_psd(s, 1.0);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(TraceCappedPsdProjection)->Arg(8)->Arg(16)->Arg(32);

static void SimplexProjection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(6);
  Dense v = rng.normal_dense(Shape{n, 1});
  for (auto _ : state) {
    Dense p = project_l1_ball(v, 1.0);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(SimplexProjection)->Arg(1024)->Arg(16384);

BENCHMARK_MAIN();
