#include <benchmark/benchmark.h>

#include "kss/conditional.hpp"
#include "kss/random.hpp"
#include "kss/sampler.hpp"
#include "kss/series.hpp"
#include "kss/zerocount.hpp"

namespace kss {
namespace {

void BM_Jdet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Engine rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(jdet(a));
}
BENCHMARK(BM_Jdet)->RangeMultiplier(2)->Range(2, 32);

void BM_SampleSystem(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = SystemSpec::homogeneous(n, std::vector<int>(static_cast<std::size_t>(n), 3));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_system(spec, seed++));
}
BENCHMARK(BM_SampleSystem)->DenseRange(1, 4);

void BM_CircleCount(benchmark::State& state) {
  const auto spec = SystemSpec::homogeneous(1, {static_cast<int>(state.range(0))});
  const auto system = sample_system(spec, 7);
  for (auto _ : state) benchmark::DoNotOptimize(count_zeros_circle(system).count);
}
BENCHMARK(BM_CircleCount)->Arg(3)->Arg(16)->Arg(64);

void BM_SphereCount(benchmark::State& state) {
  const auto spec = SystemSpec::homogeneous(2, {2, 3});
  const auto system = sample_system(spec, 11);
  SphereCountOptions opts;
  opts.expected = 2.0 * std::sqrt(6.0);
  for (auto _ : state) benchmark::DoNotOptimize(count_zeros_sphere(system, opts).count);
}
BENCHMARK(BM_SphereCount)->Unit(benchmark::kMillisecond);

void BM_DofR(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = SystemSpec::homogeneous(n, std::vector<int>(static_cast<std::size_t>(n), 2));
  for (auto _ : state) benchmark::DoNotOptimize(d_of_r_mc(spec, 0.3, 4096, 5).estimate);
}
BENCHMARK(BM_DofR)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_LambdaSeries(benchmark::State& state) {
  Engine rng(3);
  const auto bpc = random_block_pair(3, rng);
  const auto f = random_observable(3, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_series(bpc, f));
}
BENCHMARK(BM_LambdaSeries)->DenseRange(1, 4);

}  // namespace
}  // namespace kss

BENCHMARK_MAIN();
