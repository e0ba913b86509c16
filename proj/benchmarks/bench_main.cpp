#include <array>
#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "polylab/counter_rng.hpp"
#include "polylab/hermite.hpp"
#include "polylab/kernels.hpp"
#include "polylab/noise.hpp"
#include "polylab/polymer.hpp"

namespace {

const polylab::MollifierSpec& unit_bump() {
  static const polylab::MollifierSpec spec = polylab::make_mollifier(1.0, 3);
  return spec;
}

void BM_NormalPair(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    const auto z = polylab::rng::normal_pair(polylab::rng::mix64(++i));
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_NormalPair);

void BM_GaussianAt(benchmark::State& state) {
  const auto field = polylab::make_noise_field(7, 0.05, 0.25, 3);
  std::array<std::int64_t, 3> k{0, 0, 0};
  for (auto _ : state) {
    ++k[2];
    benchmark::DoNotOptimize(polylab::gaussian_at(field, 3, k));
  }
}
BENCHMARK(BM_GaussianAt);

void BM_PairWithKernel(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const auto field = polylab::make_noise_field(7, 0.05, h, 3);
  std::array<double, 3> x{0.013, -0.27, 0.4};
  std::int64_t j = 0;
  for (auto _ : state) {
    const auto r = polylab::pair_with_kernel(field, unit_bump(), x, ++j);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_PairWithKernel)->Arg(2)->Arg(4)->Arg(8);

void BM_PathSteps(benchmark::State& state) {
  const auto field = polylab::make_noise_field(7, 0.05, 0.25, 3);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto path = polylab::sample_path(seed++, 3, 4.0, 0.05);
    benchmark::DoNotOptimize(polylab::path_action(path, field, unit_bump()));
  }
  state.SetItemsProcessed(state.iterations() * 80);
}
BENCHMARK(BM_PathSteps);

void BM_HermiteCoeffs(benchmark::State& state) {
  const polylab::MultiIndex n({static_cast<int>(state.range(0)), 2, 1});
  for (auto _ : state) benchmark::DoNotOptimize(polylab::hermite_coeffs(n));
}
BENCHMARK(BM_HermiteCoeffs)->Arg(1)->Arg(5)->Arg(9);

}  // namespace
BENCHMARK_MAIN();
