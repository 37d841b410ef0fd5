#include <random>

#include <benchmark/benchmark.h>

#include "rankone/kernels.hpp"

using namespace rankone;

namespace {

std::vector<Complex> points(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> v(n);
  for (auto& z : v) z = {u(rng) * 100.0, u(rng) * 100.0};
  return v;
}

std::vector<double> positive(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i + 2);
  return v;
}

template <auto Fn>
void pairwise(benchmark::State& s) {
  const auto v = points(static_cast<std::size_t>(s.range(0)), 1);
  for (auto _ : s) benchmark::DoNotOptimize(Fn(v));
  s.SetComplexityN(s.range(0));
}

template <auto Fn>
void cauchy(benchmark::State& s) {
  const auto t = points(static_cast<std::size_t>(s.range(0)), 2);
  const auto c = points(t.size(), 3);
  const auto z = points(512, 4);
  for (auto _ : s) benchmark::DoNotOptimize(Fn(t, c, z));
}

template <auto Fn>
void gram(benchmark::State& s) {
  const std::size_t m = static_cast<std::size_t>(s.range(0));
  const auto V = points(m * 128, 5);
  for (auto _ : s) benchmark::DoNotOptimize(Fn(V, m, 128));
}

template <auto Fn>
void logderiv(benchmark::State& s) {
  const auto x = positive(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(Fn(x));
}

}  // namespace

BENCHMARK(pairwise<kernels::pairwise_min_ratio_serial>)->Arg(1000)->Arg(4000);
BENCHMARK(pairwise<kernels::pairwise_min_ratio_omp>)->Arg(1000)->Arg(4000);
BENCHMARK(cauchy<kernels::cauchy_sum_serial>)->Arg(1000)->Arg(10000);
BENCHMARK(cauchy<kernels::cauchy_sum_omp>)->Arg(1000)->Arg(10000);
BENCHMARK(gram<kernels::gram_serial>)->Arg(256)->Arg(1024);
BENCHMARK(gram<kernels::gram_omp>)->Arg(256)->Arg(1024);
BENCHMARK(logderiv<kernels::log_derivative_products_serial>)->Arg(1000)->Arg(4000);
BENCHMARK(logderiv<kernels::log_derivative_products_omp>)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
