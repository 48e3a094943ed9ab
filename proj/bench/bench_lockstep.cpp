#include <benchmark/benchmark.h>

#include <random>

#include "robonet/sim/config.hpp"
#include "robonet/sim/scenarios.hpp"
#include "robonet/task_flow.hpp"

namespace {

using robonet::Execution;

Eigen::MatrixXd random_costs(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) c(i, k) = u(rng);
  return c;
}

void BM_SimplexLockstep(benchmark::State& state, Execution exec) {
  const int n = static_cast<int>(state.range(0));
  const auto costs = random_costs(n, 42);
  robonet::LockstepAssignmentConfig cfg;
  cfg.schedule = robonet::EdgeSchedule::always(robonet::CommGraph::cycle(n, true));
  cfg.execution = exec;
  for (auto _ : state) benchmark::DoNotOptimize(robonet::solve_assignment_lockstep(costs, cfg).objective);
}

void BM_FormationScenario(benchmark::State& state, Execution exec) {
  auto doc = robonet::sim::default_document(robonet::sim::ScenarioKind::Formation, 6, 3);
  doc["duration"] = 5.0;
  doc["execution"] = exec == Execution::Serial ? "serial" : "parallel";
  const auto cfg = robonet::sim::parse_config(doc);
  for (auto _ : state) {
    std::ostringstream sink;
    benchmark::DoNotOptimize(robonet::sim::run_scenario(cfg, sink));
  }
}

void BM_FormationBatch(benchmark::State& state, Execution exec) {
  auto doc = robonet::sim::default_document(robonet::sim::ScenarioKind::Formation, 6, 0);
  doc["duration"] = 2.0;
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7};
  for (auto _ : state) benchmark::DoNotOptimize(robonet::sim::run_batch(doc, seeds, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SimplexLockstep, serial, Execution::Serial)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK_CAPTURE(BM_SimplexLockstep, parallel, Execution::Parallel)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK_CAPTURE(BM_FormationScenario, serial, Execution::Serial);
BENCHMARK_CAPTURE(BM_FormationScenario, parallel, Execution::Parallel);
BENCHMARK_CAPTURE(BM_FormationBatch, serial, Execution::Serial);
BENCHMARK_CAPTURE(BM_FormationBatch, parallel, Execution::Parallel);
BENCHMARK_MAIN();
