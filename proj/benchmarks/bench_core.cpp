#include <benchmark/benchmark.h>

#include <random>

#include "cachefair/agents.hpp"
#include "cachefair/bucket_fill.hpp"
#include "cachefair/experiment.hpp"
#include "cachefair/network.hpp"
#include "cachefair/solver.hpp"

using namespace cachefair;

namespace {

std::vector<Bucket> random_buckets(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> cap(1e-3, 5.0);
  std::vector<Bucket> b(n);
  for (std::size_t q = 0; q < n; ++q) b[q] = {static_cast<int>(q), coef(rng), cap(rng)};
  return b;
}

CrpInstance scenario_instance(double radius, std::uint64_t seed) {
  const ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  const NetworkInstance net = single_tier_network(c, radius, seed);
  const RegionMap regions = extract_regions(net.stations, net.window, c.grid_resolution);
  return build_instance(net, regions, c.user_density);
}

void BM_BucketFill(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<Bucket> buckets = random_buckets(n);
  UtilitySpec u;
  u.weight = 6.0 * static_cast<double>(n);
  u.soft_limit = static_cast<double>(n);
  BucketFiller filler;
  for (auto _ : state) benchmark::DoNotOptimize(filler.solve(buckets, u, 1.0).water_level);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BucketFill)->RangeMultiplier(10)->Range(1000, 1000000)->Complexity(benchmark::oNLogN);

void BM_ExtractRegions(benchmark::State& state) {
  const ScenarioConfig c = default_scenario(ScenarioKind::SingleTier);
  const NetworkInstance net = single_tier_network(c, 0.5, 3);
  const double resolution = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_regions(net.stations, net.window, resolution).entries.size());
  }
}
BENCHMARK(BM_ExtractRegions)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SolveScaled(benchmark::State& state) {
  const CrpInstance inst = scenario_instance(radius_for_mean_coverage(8.0, 6.0), 5);
  const SolverConfig config = scaled_config(inst);
  for (auto _ : state) benchmark::DoNotOptimize(solve_crp(inst, config).objective);
  state.counters["region_files"] = static_cast<double>(inst.region_file_count());
}
BENCHMARK(BM_SolveScaled)->Unit(benchmark::kMillisecond);

void BM_Distributed(benchmark::State& state) {
  const CrpInstance inst = scenario_instance(0.25, 6);
  const SolverConfig config = scaled_config(inst);
  for (auto _ : state) benchmark::DoNotOptimize(run_distributed(inst, config).report.objective);
}
BENCHMARK(BM_Distributed)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
