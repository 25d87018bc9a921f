#include <benchmark/benchmark.h>

#include <vector>

#include "igo/correlation.hpp"
#include "igo/gaussian.hpp"
#include "igo/rng.hpp"
#include "igo/utility_poly.hpp"
#include "igo/weights.hpp"

namespace {

std::vector<double> random_values(int n, igo::RngStream& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.next_normal();
  return v;
}

void BM_philox_block(benchmark::State& state) {
  igo::RngStream rng(42, 7);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_u64());
}
BENCHMARK(BM_philox_block);

void BM_normal_draw(benchmark::State& state) {
  igo::RngStream rng(42, 7);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_normal());
}
BENCHMARK(BM_normal_draw);

void BM_rank_utilities(benchmark::State& state) {
  const int lambda = static_cast<int>(state.range(0));
  const igo::WeightScheme scheme = igo::WeightScheme::truncation(lambda);
  igo::RngStream rng(1, 2);
  const std::vector<double> values = random_values(lambda, rng);
  for (auto _ : state) benchmark::DoNotOptimize(igo::utilities(values, scheme));
}
BENCHMARK(BM_rank_utilities)->Arg(8)->Arg(32)->Arg(128);

void BM_utility_eval(benchmark::State& state) {
  const int lambda = static_cast<int>(state.range(0));
  const igo::UtilityPolynomial u(igo::WeightScheme::truncation(lambda));
  double p = 0.0;
  for (auto _ : state) {
    p += 0.001;
    if (p > 1.0) p -= 1.0;
    benchmark::DoNotOptimize(u(p));
  }
}
BENCHMARK(BM_utility_eval)->Arg(8)->Arg(32)->Arg(128);

void BM_lipschitz_constant(benchmark::State& state) {
  const igo::UtilityPolynomial u(
      igo::WeightScheme::truncation(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(igo::lipschitz_constant(u));
}
BENCHMARK(BM_lipschitz_constant)->Arg(8)->Arg(32);

void BM_sample_population(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  igo::Vector m = igo::Vector::Zero(d);
  igo::Matrix c = igo::Matrix::Identity(d, d);
  const igo::GaussianParams theta(m, c);
  igo::RngStream rng(3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(igo::sample_population(theta, 16, rng));
}
BENCHMARK(BM_sample_population)->Arg(2)->Arg(10)->Arg(50);

void BM_kendall_tau(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  igo::RngStream rng(5, 6);
  const std::vector<double> f = random_values(n, rng);
  std::vector<double> g = f;
  for (std::size_t i = 0; i < g.size(); i += 3) g[i] = -g[i];
  for (auto _ : state) benchmark::DoNotOptimize(igo::kendall_tau_b(f, g));
}
BENCHMARK(BM_kendall_tau)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
