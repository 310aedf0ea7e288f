#include <benchmark/benchmark.h>

#include <random>

#include "seqbounds/covering.hpp"
#include "seqbounds/linalg.hpp"
#include "seqbounds/rademacher.hpp"
#include "seqbounds/transformer.hpp"

using namespace seqbounds;

namespace {

Matrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (double& x : m.data()) x = n(rng);
  return m;
}

void BM_ForwardBackward(benchmark::State& state) {
  ModelConfig c;
  c.seq_len = static_cast<std::size_t>(state.range(0));
  c.d = 16;
  c.k = 16;
  c.layers = static_cast<std::size_t>(state.range(1));
  const auto p = init_params(c);
  const Matrix x = gaussian(c.seq_len + 1, c.d, 1);
  auto grad = TransformerParams::zeros(c);
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(x, p, c, 1.0, grad));
}
BENCHMARK(BM_ForwardBackward)->ArgsProduct({{10, 20, 40, 80}, {1, 2}});

void BM_Operator2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = gaussian(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_norm(m, NormKind::operator2()));
}
BENCHMARK(BM_Operator2)->RangeMultiplier(2)->Range(4, 64);

void BM_BuildCover(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    const Cover c = build_cover(LemmaId::kL3OneInf, 2, 2, 1.0, 1.0, eps);
    benchmark::DoNotOptimize(c.points.data());
  }
}
BENCHMARK(BM_BuildCover)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

void BM_FiniteRademacher(benchmark::State& state) {
  const Matrix table = gaussian(16, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(empirical_rademacher(ClassSpec{FiniteClass{table}}, {}, 200, 4).estimate);
}
BENCHMARK(BM_FiniteRademacher)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
