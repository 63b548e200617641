#include <benchmark/benchmark.h>

#include "sdid/estimators.hpp"
#include "sdid/inference.hpp"
#include "sdid/simlab.hpp"

namespace {

using namespace sdid;

sim::DgpSpec two_level(std::size_t n) {
  sim::DgpSpec dgp;
  dgp.levels = {{"A", 0.5, 1.0, 0.0, 2.0}, {"B", 0.5, 0.0, 0.0, 1.0}};
  dgp.tau = 3.0;
  dgp.n = n;
  dgp.seed = 1;
  return dgp;
}

SubgroupContrast ab() { return {std::string("A"), std::string("B")}; }

void BM_SubgroupMeans(benchmark::State& state) {
  const auto panel = sim::generate(two_level(static_cast<std::size_t>(state.range(0)))).panel;
  for (auto _ : state) benchmark::DoNotOptimize(sdid_categorical(panel, ab()).point);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SubgroupMeans)->Arg(1000)->Arg(100000);

void BM_Bootstrap(benchmark::State& state) {
  const auto panel = sim::generate(two_level(5000)).panel;
  BootstrapOptions opt;
  opt.replicates = static_cast<std::size_t>(state.range(0));
  opt.threads = 1;
  const auto spec = EstimatorSpec::subgroup_means(ab());
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_sdid(panel, spec, opt).se_boot);
}
BENCHMARK(BM_Bootstrap)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BootstrapRefit(benchmark::State& state) {
  sim::DgpSpec dgp = two_level(2000);
  auto sample = sim::generate(dgp).panel;
  std::vector<UnitRecord> records = sample.records();
  for (std::size_t i = 0; i < records.size(); ++i) records[i].x = static_cast<double>(i % 97) / 10.0;
  const PanelDataset panel(records, CovariateKind::Continuous, "bench");
  BootstrapOptions opt;
  opt.replicates = 100;
  opt.threads = 1;
  const auto spec = EstimatorSpec::regression(BasisSpec::polynomial(3), SubgroupContrast{6.0, 2.0});
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_sdid(panel, spec, opt).se_boot);
}
BENCHMARK(BM_BootstrapRefit)->Unit(benchmark::kMillisecond);

void BM_PolynomialFit(benchmark::State& state) {
  std::vector<UnitRecord> records;
  const auto sample = sim::generate(two_level(static_cast<std::size_t>(state.range(0)))).panel;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    auto r = sample.records()[i];
    r.x = static_cast<double>(i % 1013) / 100.0;
    records.push_back(r);
  }
  const PanelDataset panel(records, CovariateKind::Continuous, "bench");
  const auto basis = BasisSpec::polynomial(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_delta_regression(panel, basis).coefficients());
}
BENCHMARK(BM_PolynomialFit)->Args({5000, 1})->Args({5000, 4})->Args({50000, 4})->Unit(benchmark::kMicrosecond);

void BM_MonteCarlo(benchmark::State& state) {
  const auto dgp = two_level(5000);
  sim::MonteCarloOptions opt;
  opt.estimator = EstimatorSpec::subgroup_means(ab());
  opt.reps = 100;
  opt.bootstrap_replicates = static_cast<std::size_t>(state.range(0));
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sim::monte_carlo(dgp, opt).bias);
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const auto dgp = two_level(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sim::generate(dgp).panel.size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
