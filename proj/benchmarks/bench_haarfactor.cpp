// Microbenchmarks for the hot paths: tree norms in both arithmetic modes,
// dense operator application, family verification, and the two
// factorization pipelines. Inputs are deterministic so numbers are
// comparable across runs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <haarfactor/directsum.hpp>
#include <haarfactor/factor.hpp>
#include <haarfactor/jones.hpp>
#include <haarfactor/quasidiag.hpp>

using namespace hf;

namespace {

HaarVector bench_vector(int depth, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  HaarVector f(depth);
  for (double& c : f.coeffs) c = 2.0 * uniform01(g()) - 1.0;
  return f;
}

HaarOperator bench_operator(int depth, std::uint64_t seed) {
  RandomOpSpec spec;
  spec.delta = 0.5;
  spec.noise = 0.02;
  return random_operator(depth, spec, seed);
}

BlockBasisFamily bench_family(int n, int N, std::uint64_t seed) {
  RandomOpSpec spec;
  spec.delta = 0.5;
  spec.noise = 0.02;
  return quasi_diagonalize(random_operator(N, spec, seed), n,
                           Schedule::adaptive(0.25), 0.5)
      .family;
}

void BM_SlInfNorm(benchmark::State& state) {
  set_arith_mode(state.range(1) ? ArithMode::Exact : ArithMode::Float);
  HaarVector f = bench_vector(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(sl_inf_norm(f));
  clear_arith_mode_override();
}
BENCHMARK(BM_SlInfNorm)
    ->ArgsProduct({{8, 10, 12}, {0, 1}})
    ->ArgNames({"depth", "exact"});

void BM_H1Norm(benchmark::State& state) {
  HaarVector f = bench_vector(static_cast<int>(state.range(0)), 12);
  for (auto _ : state) benchmark::DoNotOptimize(h1_norm(f));
}
BENCHMARK(BM_H1Norm)->Arg(8)->Arg(10)->Arg(12)->ArgName("depth");

void BM_Pairing(benchmark::State& state) {
  HaarVector f = bench_vector(static_cast<int>(state.range(0)), 13);
  HaarVector g = bench_vector(static_cast<int>(state.range(0)), 14);
  for (auto _ : state) benchmark::DoNotOptimize(pairing(f, g));
}
BENCHMARK(BM_Pairing)->Arg(8)->Arg(10)->Arg(12)->ArgName("depth");

void BM_Apply(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  HaarOperator T = bench_operator(depth, 15);
  HaarVector f = bench_vector(depth, 16);
  for (auto _ : state) benchmark::DoNotOptimize(apply(T, f));
}
BENCHMARK(BM_Apply)->Arg(6)->Arg(8)->Arg(10)->ArgName("depth");

void BM_VerifyJones(benchmark::State& state) {
  BlockBasisFamily fam = bench_family(static_cast<int>(state.range(0)), 8, 17);
  for (auto _ : state) benchmark::DoNotOptimize(verify_jones(fam));
}
BENCHMARK(BM_VerifyJones)->Arg(1)->Arg(2)->Arg(3)->ArgName("n");

void BM_QuasiDiag(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  HaarOperator T = bench_operator(depth, 18);
  Schedule sched = Schedule::adaptive(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_diagonalize(T, 2, sched, 0.5));
}
BENCHMARK(BM_QuasiDiag)->Arg(6)->Arg(8)->Arg(10)->ArgName("depth");

void BM_FactorLocal(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  HaarOperator T = bench_operator(depth, 19);
  Schedule sched = Schedule::adaptive(0.25);
  for (auto _ : state)
    benchmark::DoNotOptimize(factor_large_diagonal(T, 2, 0.5, 0.25, sched));
}
BENCHMARK(BM_FactorLocal)->Arg(6)->Arg(8)->Arg(10)->ArgName("depth");

void BM_FactorPrimary(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  HaarOperator T = bench_operator(depth, 20);
  Schedule sched = Schedule::adaptive(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(factor_primary(T, 1, 0.25, sched));
}
BENCHMARK(BM_FactorPrimary)->Arg(6)->Arg(8)->ArgName("depth");

void BM_VerifyCertificate(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  HaarOperator T = bench_operator(depth, 21);
  FactorizationCertificate cert =
      factor_large_diagonal(T, 2, 0.5, 0.25, Schedule::adaptive(0.25));
  for (auto _ : state) benchmark::DoNotOptimize(verify_certificate(cert, T));
}
BENCHMARK(BM_VerifyCertificate)->Arg(6)->Arg(8)->ArgName("depth");

void BM_EmbedSum(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  DirectSumVector x = DirectSumVector::zero(M, std::numeric_limits<double>::infinity());
  for (int k = 0; k <= M; ++k) x.blocks[static_cast<std::size_t>(k)] = bench_vector(k, 22 + k);
  for (auto _ : state) benchmark::DoNotOptimize(embed_sum(x));
}
BENCHMARK(BM_EmbedSum)->Arg(4)->Arg(6)->Arg(8)->ArgName("M");

}  // namespace

BENCHMARK_MAIN();
