#include <benchmark/benchmark.h>

#include "alr/alr.hpp"

namespace {

alr::Dataset pool_of(std::size_t n, std::size_t d) {
  return alr::normalize_features(alr::gen_synthetic(n, d, 3, 0.1, 1).data).data;
}

void BM_FitRidge(benchmark::State& state) {
  const auto data = pool_of(static_cast<std::size_t>(state.range(0)), 46);
  const alr::Vector y = data.labels().col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alr::fit(data.features(), y, alr::SolverConfig::ridge_per_sample()));
  }
}
BENCHMARK(BM_FitRidge)->Arg(50)->Arg(250)->Arg(1000);

void BM_FitLasso(benchmark::State& state) {
  const auto data = pool_of(static_cast<std::size_t>(state.range(0)), 46);
  const alr::Vector y = data.labels().col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(alr::fit(data.features(), y, alr::SolverConfig::lasso()));
  }
}
BENCHMARK(BM_FitLasso)->Arg(250);

// One selection step with `range(0)` labels already chosen from a 284-row pool.
template <alr::StrategyKind Kind>
void BM_Step(benchmark::State& state) {
  const auto pool = pool_of(284, 46);
  const alr::StrategySpec spec{Kind, 0};
  alr::PoolState base(pool, alr::SolverConfig::ridge_per_sample(), 1);
  alr::run_selection(base, alr::StrategySpec{alr::StrategyKind::random},
                     static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    alr::PoolState copy = base;
    benchmark::DoNotOptimize(alr::select_next(copy, spec));
  }
}
BENCHMARK(BM_Step<alr::StrategyKind::mt_igs>)->Arg(50)->Arg(200);
BENCHMARK(BM_Step<alr::StrategyKind::gsy>)->Arg(50)->Arg(200);
BENCHMARK(BM_Step<alr::StrategyKind::qbc>)->Arg(50)->Arg(200);
BENCHMARK(BM_Step<alr::StrategyKind::emcm>)->Arg(50)->Arg(200);

void BM_RunSingle(benchmark::State& state) {
  const auto data = alr::normalize_features(alr::gen_synthetic(947, 46, 3, 0.1, 2).data).data;
  const auto split = alr::split_train_test(data, {0.3, 0});
  alr::ExperimentConfig cfg;
  cfg.strategy = alr::parse_strategy("mt_igs");
  cfg.k_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(alr::run_single(split.pool, split.test, cfg, 0));
  }
}
BENCHMARK(BM_RunSingle)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
