#include <benchmark/benchmark.h>

#include "pdbps/confidence.hpp"
#include "pdbps/meta.hpp"
#include "pdbps/occupancy.hpp"
#include "pdbps/oracle.hpp"

namespace {

using namespace pdbps;

LoopFreeCmdp bench_mdp() {
  return LoopFreeCmdp({{0}, {1, 2}, {3, 4}, {5}}, 2,
                      {
                          {0.9, 0.1},
                          {0.1, 0.9},
                          {0.85, 0.15},
                          {0.3, 0.7},
                          {0.6, 0.4},
                          {0.2, 0.8},
                          {1.0},
                          {1.0},
                          {1.0},
                          {1.0},
                      },
                      1);
}

Scenario bench_scenario(const LoopFreeCmdp& mdp) {
  const std::vector<double> reward_means = {0.9, 0.2, 0.8, 0.3, 0.5,
                                            0.2, 0.9, 0.1, 0.4, 0.3};
  const std::vector<double> constraint_means = {0.8, -0.9, 0.5, -0.5, 0.3,
                                                -0.3, -0.2, -0.2, -0.2, -0.2};
  return Scenario::from_json(
      mdp, nlohmann::json{
               {"rewards",
                {{"kind", "stochastic"}, {"dist", "bernoulli"}, {"means", reward_means}}},
               {"constraints",
                {{"kind", "stochastic"},
                 {"means", nlohmann::json::array({constraint_means})}}},
           });
}

void BM_OccupancyFromPolicy(benchmark::State& state) {
  const auto mdp = bench_mdp();
  const auto pi = Policy::uniform(mdp);
  for (auto _ : state) benchmark::DoNotOptimize(occupancy_from_policy(mdp, pi));
}
BENCHMARK(BM_OccupancyFromPolicy);

void BM_UpperOccupancy(benchmark::State& state) {
  const auto mdp = bench_mdp();
  ConfidenceModel model(mdp, 10000, 0.05);
  const auto pi = Policy::uniform(mdp);
  for (auto _ : state) benchmark::DoNotOptimize(model.upper_occupancy(pi));
}
BENCHMARK(BM_UpperOccupancy);

void BM_MaxExpectation(benchmark::State& state) {
  const auto mdp = bench_mdp();
  ConfidenceModel model(mdp, 10000, 0.05);
  const std::vector<double> v = {0.3, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(model.max_expectation(0, v));
}
BENCHMARK(BM_MaxExpectation);

void BM_SolveOpt(benchmark::State& state) {
  const auto mdp = bench_mdp();
  const auto scenario = bench_scenario(mdp);
  const auto rbar = scenario.mean_reward(1024);
  const auto gbar = scenario.mean_constraints(1024);
  for (auto _ : state) benchmark::DoNotOptimize(solve_opt(mdp, rbar, gbar));
}
BENCHMARK(BM_SolveOpt);

void BM_Episode(benchmark::State& state) {
  const auto mdp = bench_mdp();
  const auto scenario = bench_scenario(mdp);
  RunConfig cfg;
  cfg.num_episodes = 1 << 20;
  cfg.mode = ConstantMode::Practical;
  cfg.record_occupancies = false;
  PdbpsLearner learner(mdp, cfg);
  long t = 0;
  for (auto _ : state) {
    ++t;
    RngStream srng(1, static_cast<std::uint64_t>(t), StreamKind::Scenario);
    RngStream trng(1, static_cast<std::uint64_t>(t), StreamKind::Trajectory);
    const auto reward = scenario.reward_at(t, srng);
    const auto constraints = scenario.constraints_at(t, srng);
    benchmark::DoNotOptimize(learner.run_episode(reward, constraints, trng));
  }
}
BENCHMARK(BM_Episode);

}  // namespace

BENCHMARK_MAIN();
