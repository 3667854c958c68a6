#include <benchmark/benchmark.h>

#include "mbf/bf_test.hpp"
#include "mbf/dist.hpp"
#include "mbf/rng.hpp"
#include "mbf/sim.hpp"
#include "mbf/wchisq.hpp"

using namespace mbf;

namespace {

SpdMatrix fixture_spd(int p, std::uint64_t seed) {
  RngStream s(seed);
  return sample_wishart(s, SpdMatrix::identity(p), p + 3);
}

void BM_WchisqCdfP2(benchmark::State& state) {
  const WeightVector w(Vec{2.0, 5.0});
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wchisq_cdf(t, w));
    t += 1e-6;
  }
}
BENCHMARK(BM_WchisqCdfP2);

void BM_WchisqCdfP5(benchmark::State& state) {
  const WeightVector w(Vec{0.5, 1.0, 1.5, 2.5, 4.0});
  double t = 4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wchisq_cdf(t, w));
    t += 1e-6;
  }
}
BENCHMARK(BM_WchisqCdfP5);

void BM_SymEigen(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const SpdMatrix m = fixture_spd(p, 11);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(m));
}
BENCHMARK(BM_SymEigen)->Arg(3)->Arg(5)->Arg(10);

void BM_CanonicalDraw(benchmark::State& state) {
  const CanonicalParams params{0.4, 5, 10, 20};
  RngStream s(12);
  for (auto _ : state) benchmark::DoNotOptimize(sample_canonical_t2(params, s));
}
BENCHMARK(BM_CanonicalDraw);

void BM_DirectReplication(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int n = 2 * m;
  const int p = 5;
  const SpdMatrix sigma = fixture_spd(p, 13);
  const Matrix l = cholesky(sigma).lower();
  RngStream s(14);
  Matrix x(m, p), y(n, p);
  Vec z(p);
  for (auto _ : state) {
    for (int r = 0; r < m; ++r) {
      sample_normal_fill(s, z.data(), p);
      for (int j = 0; j < p; ++j) {
        double acc = 0.0;
        for (int q = 0; q <= j; ++q) acc += l(j, q) * z[q];
        x(r, j) = acc;
      }
    }
    for (int r = 0; r < n; ++r) {
      sample_normal_fill(s, z.data(), p);
      for (int j = 0; j < p; ++j) {
        double acc = 0.0;
        for (int q = 0; q <= j; ++q) acc += l(j, q) * z[q];
        y(r, j) = acc;
      }
    }
    benchmark::DoNotOptimize(run_all_tests(TwoSampleData{x, y}));
  }
}
BENCHMARK(BM_DirectReplication)->Arg(10)->Arg(100);

void BM_FBoundPvalue(benchmark::State& state) {
  double t2 = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbound_pvalue(t2, 5, 10, 20));
    t2 += 1e-6;
  }
}
BENCHMARK(BM_FBoundPvalue);

}  // namespace

BENCHMARK_MAIN();
