#include <benchmark/benchmark.h>

#include "bwmr/baselines.hpp"
#include "bwmr/lrvb.hpp"
#include "bwmr/model.hpp"
#include "bwmr/simulation.hpp"

namespace {

bwmr::SummaryDataset case1(std::size_t n, std::uint64_t seed = 1) {
  bwmr::sim::SimulationSpec spec;
  spec.regime = bwmr::sim::Regime::Case1;
  spec.beta = 0.3;
  spec.n_snps = n;
  bwmr::Rng rng(seed);
  return bwmr::sim::generate(spec, rng).data;
}

void BM_FitVem(benchmark::State& st) {
  const auto d = case1(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::fit_vem(d));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_FitVem)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Lrvb(benchmark::State& st) {
  const auto d = case1(static_cast<std::size_t>(st.range(0)));
  const bwmr::ModelConfig cfg;
  const auto fit = bwmr::fit_vem(d, cfg);
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::corrected_variance(fit.state, fit.params, d, cfg));
}
BENCHMARK(BM_Lrvb)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& st) {
  const auto d = case1(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::estimate(d));
}
BENCHMARK(BM_Estimate)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Ivw(benchmark::State& st) {
  const auto d = case1(300);
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::baselines::ivw(d));
}
BENCHMARK(BM_Ivw);

void BM_Egger(benchmark::State& st) {
  const auto d = case1(300);
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::baselines::egger(d));
}
BENCHMARK(BM_Egger);

void BM_Gsmr(benchmark::State& st) {
  const auto d = case1(300);
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::baselines::gsmr_lite(d));
}
BENCHMARK(BM_Gsmr);

void BM_Raps(benchmark::State& st) {
  const auto d = case1(300);
  for (auto _ : st) benchmark::DoNotOptimize(bwmr::baselines::raps_lite(d));
}
BENCHMARK(BM_Raps)->Unit(benchmark::kMicrosecond);

void BM_GenerateSummary(benchmark::State& st) {
  bwmr::sim::SimulationSpec spec;
  spec.regime = bwmr::sim::Regime::Case2;
  spec.n_snps = 300;
  std::uint64_t r = 0;
  for (auto _ : st) {
    bwmr::Rng rng(bwmr::replicate_seed(1, r++));
    benchmark::DoNotOptimize(bwmr::sim::generate(spec, rng));
  }
}
BENCHMARK(BM_GenerateSummary);

void BM_GenerateIndividual(benchmark::State& st) {
  bwmr::sim::SimulationSpec spec;
  spec.regime = bwmr::sim::Regime::IndividualFourGroup;
  spec.n0 = 2000;
  spec.n1 = spec.n2 = 2000;
  spec.pval_threshold = 1e-4;
  std::uint64_t r = 0;
  for (auto _ : st) {
    bwmr::Rng rng(bwmr::replicate_seed(1, r++));
    benchmark::DoNotOptimize(bwmr::sim::generate(spec, rng));
  }
}
BENCHMARK(BM_GenerateIndividual)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
