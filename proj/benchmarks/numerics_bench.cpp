#include <benchmark/benchmark.h>

#include "fplab/numerics.hpp"
#include "fplab/spectral.hpp"

namespace {

fplab::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  fplab::SeededRng rng(seed);
  return fplab::Matrix(rows, cols, fplab::gaussian_sample(rng, 0.0, 1.0, rows * cols));
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  fplab::Matrix c(n, n);
  for (auto _ : state) {
    fplab::gemm_accumulate(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Gemm)->Arg(64)->Arg(128)->Arg(256);

void BM_PowerIteration(benchmark::State& state) {
  const auto m = random_matrix(200, 200, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fplab::power_iteration_spectral_norm(m, 10));
}
BENCHMARK(BM_PowerIteration);

// Power-of-two sizes take the FFT path, the others the direct sum.
void BM_Dft(benchmark::State& state) {
  fplab::SeededRng rng(4);
  const auto f = fplab::gaussian_sample(rng, 0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fplab::dft(f).coefficients.data());
}
BENCHMARK(BM_Dft)->Arg(120)->Arg(128)->Arg(1024)->Arg(1000);

void BM_TanhUnitTransform(benchmark::State& state) {
  double k = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fplab::tanh_unit_ft(0.7, 0.3, k));
    k = k < 20.0 ? k + 0.01 : 0.5;
  }
}
BENCHMARK(BM_TanhUnitTransform);

}  // namespace

BENCHMARK_MAIN();
