#include <benchmark/benchmark.h>

#include "bops/acquisition.hpp"
#include "bops/gp.hpp"
#include "bops/optimizers.hpp"

namespace {

std::vector<bops::Permutation> sample(int n, int d, std::uint64_t seed) {
  bops::Rng rng(seed);
  std::vector<bops::Permutation> xs;
  for (int i = 0; i < n; ++i) xs.push_back(bops::random_permutation(d, rng));
  return xs;
}

void BM_DiscordantPairs(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto xs = sample(2, d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bops::discordant_pairs(xs[0], xs[1]));
}
BENCHMARK(BM_DiscordantPairs)->Arg(6)->Arg(10)->Arg(15);

void BM_GramMatrix(benchmark::State& state) {
  const auto xs = sample(static_cast<int>(state.range(0)), 10, 2);
  const bops::KernelSpec spec{.family = bops::KernelFamily::kMallows, .lengthscale = 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(bops::gram_matrix(spec, xs));
}
BENCHMARK(BM_GramMatrix)->Arg(50)->Arg(100)->Arg(200);

void BM_FitMallows(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto xs = sample(n, 10, 3);
  std::vector<double> ys;
  for (const auto& x : xs) ys.push_back(bops::discordant_pairs(x, bops::Permutation::identity(10)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bops::fit(bops::KernelSpec{.family = bops::KernelFamily::kMallows}, xs, ys));
  }
}
BENCHMARK(BM_FitMallows)->Arg(20)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_QapTrace(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  bops::Rng rng(4);
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(bops::pair_count(d));
  for (auto& v : w) v = normal(rng);
  const bops::QapMatrices q = bops::build_qap(w, d);
  const bops::Permutation p = bops::random_permutation(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(bops::qap_trace(q, p));
}
BENCHMARK(BM_QapTrace)->Arg(6)->Arg(10)->Arg(15);

void BM_SolveTsQap(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  bops::Rng rng(5);
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(bops::pair_count(d));
  for (auto& v : w) v = normal(rng);
  const bops::QapMatrices q = bops::build_qap(w, d);
  const bops::SearchBudget budget = bops::SearchBudget::for_dimension(d);
  for (auto _ : state) benchmark::DoNotOptimize(bops::solve_ts_qap(q, budget, rng));
}
BENCHMARK(BM_SolveTsQap)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
