// Serial reference loop vs the OpenMP drop-parallel loop, plus the per-drop
// kernels that dominate a run.

#include <benchmark/benchmark.h>

#include "cellfree/experiment.hpp"
#include "cellfree/oracle.hpp"

using namespace cellfree;

namespace {

ExperimentConfig bench_config() {
  ExperimentConfig cfg;
  cfg.network.L = 9;
  cfg.network.N = 2;
  cfg.network.K = 12;
  cfg.aging.r = 0.9;
  cfg.schemes.assign(kAllSchemes.begin(), kAllSchemes.end());
  cfg.drops = 8;
  cfg.realizations_per_drop = 10;
  cfg.pi_samples = 50;
  cfg.master_seed = 1;
  cfg.validate();
  return cfg;
}

void BM_RunSerial(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(cfg));
}
BENCHMARK(BM_RunSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_RunParallel(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, workers));
}
BENCHMARK(BM_RunParallel)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_TeamStages(benchmark::State& state) {
  NetworkConfig net;
  Rng geo = derive_stream({2, 0, 0, 0, Purpose::Geometry});
  const Scenario s = build_scenario(net, geo);
  const Aging aging = Aging::uniform(net.L, net.K, 0.9);
  Rng ch = derive_stream({2, 0, 0, 0, Purpose::Channel});
  const ChannelPair pair = sample_pair(s, aging, ch);
  const SeedPath base{2, 0, 0, 0, Purpose::PiSampling};
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(team_stages(pair.past, s, aging, samples, base));
}
BENCHMARK(BM_TeamStages)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_StageSolve(benchmark::State& state) {
  const int L = 16, K = static_cast<int>(state.range(0));
  const bool stacked = state.range(1) != 0;
  Rng rng = derive_stream({3, 0, 0, 0, Purpose::Perturbation});
  std::vector<CMatrix> pi;
  for (int l = 0; l < L; ++l) pi.push_back(oracle::random_hermitian_psd(K, 0.95, rng));
  for (auto _ : state) {
    if (stacked)
      benchmark::DoNotOptimize(oracle::stacked_team_solve(pi));
    else
      benchmark::DoNotOptimize(solve_team_stages(pi));
  }
  state.SetLabel(stacked ? "stacked LK x LK" : "reduced");
}
BENCHMARK(BM_StageSolve)->Args({10, 0})->Args({10, 1})->Args({50, 0})->Args({50, 1})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
