#include <benchmark/benchmark.h>

#include "tcr/assignment.hpp"
#include "tcr/design.hpp"
#include "tcr/estimator.hpp"
#include "tcr/inference.hpp"
#include "tcr/pipeline.hpp"
#include "tcr/rng.hpp"
#include "tcr/synth.hpp"

using namespace tcr;

namespace {

Dataset population(int districts) {
  PopulationConfig p;
  p.n_districts = districts;
  p.seed = 17;
  return generate(p, ProductionParams::defaults(3, 3));
}

AssignmentProblem random_cell(std::size_t clusters, int L) {
  Rng rng(3);
  AssignmentProblem p;
  p.L = L;
  std::vector<int> supply(static_cast<std::size_t>(L), 0);
  for (std::size_t c = 0; c < clusters; ++c) {
    std::vector<double> v(static_cast<std::size_t>(L));
    for (auto& x : v) x = rng.normal();
    p.values.push_back(v);
    p.cell.push_back(0);
    ++supply[c % static_cast<std::size_t>(L)];
  }
  p.supply = {supply};
  return p;
}

void BM_SolveAssignment(benchmark::State& state) {
  const auto p = random_cell(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(p).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_Synthesize(benchmark::State& state) {
  PopulationConfig p;
  p.n_districts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate(p, ProductionParams::defaults(3, 3)).students.size());
}
BENCHMARK(BM_Synthesize)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_TslsFit(benchmark::State& state) {
  const auto ds = population(static_cast<int>(state.range(0)));
  const auto m = absorb_blocks(build_design(ds, CategorySpec::defaults(3, 3)));
  for (auto _ : state) benchmark::DoNotOptimize(tsls_fit(m).coef);
  state.counters["rows"] = static_cast<double>(m.n());
}
BENCHMARK(BM_TslsFit)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_PipelineReplication(benchmark::State& state) {
  PipelineConfig cfg;
  cfg.spec = CategorySpec::defaults(3, 3);
  const Pipeline pipeline(population(static_cast<int>(state.range(0))), cfg);
  Rng rng(5);
  for (auto _ : state) {
    const auto w = draw_weights(pipeline.cluster_count(), rng);
    benchmark::DoNotOptimize(pipeline.statistics(pipeline.run(w)));
  }
}
BENCHMARK(BM_PipelineReplication)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
