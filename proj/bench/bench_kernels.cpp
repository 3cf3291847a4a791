// Serial reference vs OpenMP kernels, plus end-to-end batch inference.

#include <benchmark/benchmark.h>

#include "dtcx/kernels.hpp"
#include "dtcx/neural.hpp"
#include "dtcx/random.hpp"

namespace {

dtcx::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  dtcx::Rng rng = dtcx::make_rng(seed);
  dtcx::Matrix m(rows, cols);
  for (double& v : m.flat()) v = dtcx::uniform01(rng) - 0.5;
  return m;
}

template <void (*Affine)(const dtcx::Matrix&, const dtcx::Matrix&, std::span<const double>,
                         dtcx::Matrix&)>
void BM_Affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 128, 1);
  const auto b = random_matrix(128, 64, 2);
  std::vector<double> bias(64, 0.1);
  dtcx::Matrix out;
  for (auto _ : state) {
    Affine(a, b, bias, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <void (*AtB)(const dtcx::Matrix&, const dtcx::Matrix&, dtcx::Matrix&)>
void BM_MatmulAtB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 128, 3);
  const auto b = random_matrix(n, 64, 4);
  dtcx::Matrix out;
  for (auto _ : state) {
    AtB(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_PredictProba(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t hidden[] = {128, 64, 32};
  const auto mlp = dtcx::neural::init_mlp(16, hidden, 7);
  const auto x = random_matrix(n, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(dtcx::neural::predict_proba(mlp, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_Affine<dtcx::kernels::serial::affine>)->Name("affine/serial")->Arg(32)->Arg(5000);
BENCHMARK(BM_Affine<dtcx::kernels::omp::affine>)->Name("affine/omp")->Arg(32)->Arg(5000);
BENCHMARK(BM_MatmulAtB<dtcx::kernels::serial::matmul_at_b>)->Name("at_b/serial")->Arg(32)->Arg(5000);
BENCHMARK(BM_MatmulAtB<dtcx::kernels::omp::matmul_at_b>)->Name("at_b/omp")->Arg(32)->Arg(5000);
BENCHMARK(BM_PredictProba)->Arg(77)->Arg(5000);

BENCHMARK_MAIN();
