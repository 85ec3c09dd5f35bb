// Serial reference kernels against their OpenMP counterparts, plus the
// end-to-end enforcement at a few table sizes. Run with
// OMP_NUM_THREADS=<k> to vary the parallel side.

#include <benchmark/benchmark.h>

#include "synthcorr/kernels.hpp"
#include "synthcorr/procrustes.hpp"
#include "synthcorr/sampler.hpp"

namespace sk = synthcorr::kernels;

namespace {

constexpr Eigen::Index kCols = 5;

Eigen::MatrixXd table(Eigen::Index n, std::uint64_t seed) { return synthcorr::standard_normal_matrix(n, kCols, seed); }

template <Eigen::MatrixXd (*Gram)(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>
void BM_CrossGram(benchmark::State& state) {
  const Eigen::MatrixXd x = table(state.range(0), 1);
  const Eigen::MatrixXd y = table(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(Gram(x, y));
  state.SetItemsProcessed(state.iterations() * state.range(0) * kCols * kCols);
}

template <Eigen::MatrixXd (*Multiply)(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>
void BM_MultiplySmall(benchmark::State& state) {
  const Eigen::MatrixXd x = table(state.range(0), 1);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(kCols, kCols);
  for (auto _ : state) benchmark::DoNotOptimize(Multiply(x, w));
  state.SetItemsProcessed(state.iterations() * state.range(0) * kCols * kCols);
}

template <Eigen::VectorXd (*Means)(const Eigen::MatrixXd&)>
void BM_ColumnMeans(benchmark::State& state) {
  const Eigen::MatrixXd x = table(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(Means(x));
  state.SetItemsProcessed(state.iterations() * state.range(0) * kCols);
}

void BM_Enforce(benchmark::State& state) {
  const synthcorr::FeatureMatrix original(table(state.range(0), 1));
  const synthcorr::FeatureMatrix synthetic(table(state.range(0), 2));
  const auto targets = synthcorr::StatTargets::from_stats(synthcorr::feature_stats(synthetic));
  for (auto _ : state) benchmark::DoNotOptimize(synthcorr::enforce_correlations(original, synthetic, targets));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CrossGram<sk::serial::cross_gram>)->Name("cross_gram/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_CrossGram<sk::parallel::cross_gram>)->Name("cross_gram/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_MultiplySmall<sk::serial::multiply_small>)->Name("multiply_small/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_MultiplySmall<sk::parallel::multiply_small>)->Name("multiply_small/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_ColumnMeans<sk::serial::column_means>)->Name("column_means/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_ColumnMeans<sk::parallel::column_means>)->Name("column_means/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_Enforce)->Name("enforce_correlations")->Range(1 << 12, 1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
