#include <doctest.h>

#include <cmath>

#include "pdbps/meta.hpp"
#include "pdbps/metrics.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace pdbps;
using namespace pdbps::testing;

namespace {
RunConfig practical_config(long T, std::uint64_t seed) {
  RunConfig cfg;
  cfg.num_episodes = T;
  cfg.mode = ConstantMode::Practical;
  cfg.seed = seed;
  return cfg;
}
}  // namespace

TEST_CASE("scaled losses are the shifted Lagrangian of the observed feedback") {
  Trajectory traj;
  traj.steps.push_back({0, 0, 1.0, {-1.0}});  // r=1, g=-1
  traj.steps.push_back({1, 0, 0.0, {1.0}});
  const std::vector<double> lambda = {0.5};
  const auto losses = build_losses(traj, lambda, 1.5);
  CHECK(losses.scaled[0] == doctest::Approx(1.5 - 0.5 - 1.0));  // the lower endpoint 0
  CHECK(losses.scaled[1] == doctest::Approx(1.5 + 0.5 - 0.0));
  CHECK(losses.unscaled[0] == doctest::Approx(-1.5));
  CHECK(losses.unscaled[1] == doctest::Approx(0.5));
}

TEST_CASE("first episode: uniform policy, unit shift, range two") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  PdbpsLearner learner(mdp, practical_config(64, 1));
  CHECK(learner.shift() == 1.0);
  CHECK(learner.loss_range() == 2.0);
  for (double p : learner.policy().probs) CHECK(p == doctest::Approx(0.5));
  // lambda_1 = 0 makes the first losses 1 - r in [0,1].
  RngStream srng(1, 1, StreamKind::Scenario);
  RngStream trng(1, 1, StreamKind::Trajectory);
  const auto rec = learner.run_episode(scenario.reward_at(1, srng), scenario.constraints_at(1, srng), trng);
  CHECK(rec.lambda_l1 == 0.0);
  CHECK(rec.shift == 1.0);
  CHECK(rec.loss_range == 2.0);
}

TEST_CASE("run of length one returns a single uniform-policy record") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(1, 7);
  const auto record = run(mdp, scenario, cfg);
  REQUIRE(record.episodes.size() == 1);
  CHECK(record.episodes[0].lambda_l1 == 0.0);
}

TEST_CASE("inactive scenario keeps the multipliers at zero") {
  const auto mdp = trend_mdp();
  const nlohmann::json doc = {
      {"rewards",
       {{"kind", "stochastic"},
        {"dist", "bernoulli"},
        {"means", std::vector<double>(mdp.num_pairs(), 0.0)}}},
      {"constraints",
       {{"kind", "adversarial"},
        {"generator", "sequence"},
        {"values", nlohmann::json::array(
                       {nlohmann::json::array({std::vector<double>(mdp.num_pairs(), -1.0)})})}}},
  };
  // A single explicit episode, repeated by a periodic wrapper instead:
  nlohmann::json periodic = doc;
  periodic["constraints"] = {{"kind", "adversarial"},
                             {"generator", "periodic_flip"},
                             {"period", 1},
                             {"phases", nlohmann::json::array({nlohmann::json::array(
                                            {std::vector<double>(mdp.num_pairs(), -1.0)})})}};
  const auto scenario = Scenario::from_json(mdp, periodic);
  auto cfg = practical_config(128, 3);
  const auto record = run(mdp, scenario, cfg);
  for (const auto& ep : record.episodes) {
    CHECK(ep.lambda_l1 == 0.0);
    CHECK(ep.reward_exact == 0.0);
  }
  // Zero optimum, zero collected reward: the regret is exactly zero.
  CHECK(compute_metrics(record, 0.0).regret_strong == 0.0);
}

TEST_CASE("loop invariants hold on a full practical run") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(600, 11);
  const auto record = run(mdp, scenario, cfg);
  const double eta = record.dual_step_size;
  const double cap = std::pow(600.0, 0.25);
  double last_range = 0.0;
  for (std::size_t t = 0; t < record.episodes.size(); ++t) {
    const auto& ep = record.episodes[t];
    CHECK(ep.shift == doctest::Approx(1.0 + ep.lambda_l1).epsilon(1e-12));
    CHECK(ep.loss_range >= 2.0);
    CHECK(ep.loss_range >= last_range);
    last_range = ep.loss_range;
    for (double l : ep.multipliers) {
      CHECK(l >= 0.0);
      CHECK(l <= cap);
    }
    if (t > 0) {
      CHECK(ep.lambda_l1 - record.episodes[t - 1].lambda_l1 <=
            mdp.num_constraints() * mdp.horizon() * eta + 1e-12);
      // Range covers twice every earlier shift (pre-update recurrence).
      CHECK(ep.loss_range >= 2.0 * record.episodes[t - 1].shift - 1e-12);
    }
    CHECK(ep.floor_margin >= 0.0);
    CHECK(ep.learning_rate * ep.max_q_estimate <= 0.5 + 1e-9);
  }
}

TEST_CASE("replaying a seed reproduces the run bit for bit") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(200, 42);
  const auto a = run(mdp, scenario, cfg);
  const auto b = run(mdp, scenario, cfg);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (std::size_t t = 0; t < a.episodes.size(); ++t) {
    CHECK(a.episodes[t].reward_exact == b.episodes[t].reward_exact);
    CHECK(a.episodes[t].lambda_l1 == b.episodes[t].lambda_l1);
    CHECK(a.episodes[t].loss_range == b.episodes[t].loss_range);
    CHECK(a.episodes[t].violation_exact == b.episodes[t].violation_exact);
  }
}

TEST_CASE("the two range recurrences differ only through the newer shift") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(300, 13);
  cfg.practical_dual_step = 0.05;  // sizable steps separate the variants
  const auto pre = run(mdp, scenario, cfg);
  cfg.xi_variant = XiVariant::PostUpdateShift;
  const auto post = run(mdp, scenario, cfg);
  for (std::size_t t = 0; t < post.episodes.size(); ++t) {
    CHECK(post.episodes[t].loss_range >= pre.episodes[t].loss_range - 1e-12);
    if (t > 0)
      CHECK(post.episodes[t].loss_range >= 2.0 * post.episodes[t].shift - 1e-12);
  }
}

TEST_CASE("paper mode keeps every hard assertion over a short run") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  RunConfig cfg;
  cfg.num_episodes = 200;
  cfg.mode = ConstantMode::Paper;
  cfg.seed = 5;
  const auto record = run(mdp, scenario, cfg);
  for (const auto& ep : record.episodes) {
    CHECK(ep.learning_rate * ep.max_q_estimate <= 0.5 + 1e-9);
    CHECK(ep.learning_rate * ep.max_bonus <= 0.5 / mdp.horizon() + 1e-9);
    CHECK(ep.floor_margin >= 0.0);
  }
  CHECK(record.soft_bonus_breaches == 0);
}

TEST_CASE("stochastic and adversarial scenarios drive the identical loop") {
  // Same seed, same reward stream; swapping the constraint generator only
  // changes the observed violations, not any code path of the loop.
  const auto mdp = trend_mdp();
  const auto stochastic = Scenario::from_json(mdp, trend_scenario_json());
  const auto adversarial = Scenario::from_json(mdp, adversarial_scenario_json(16));
  auto cfg = practical_config(100, 17);
  CHECK_NOTHROW(run(mdp, stochastic, cfg));
  CHECK_NOTHROW(run(mdp, adversarial, cfg));
}

TEST_CASE("occupancies are recorded when requested") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(16, 3);
  const auto with = run(mdp, scenario, cfg);
  CHECK(with.occupancies.size() == 16);
  CHECK(with.occupancies[0].size() == static_cast<std::size_t>(mdp.num_pairs()));
  cfg.record_occupancies = false;
  const auto without = run(mdp, scenario, cfg);
  CHECK(without.occupancies.empty());
}

TEST_CASE("multiplier excursions above the soft cap are counted, not fatal") {
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(400, 5);
  cfg.practical_dual_step = 0.05;
  cfg.lambda_cap_soft = 1e-6;  // everything above this counts as a breach
  const auto record = run(mdp, scenario, cfg);
  CHECK(record.soft_lambda_breaches > 0);
  cfg.lambda_cap_soft = std::numeric_limits<double>::infinity();
  const auto quiet = run(mdp, scenario, cfg);
  CHECK(quiet.soft_lambda_breaches == 0);
}

TEST_CASE("multipliers dominate the stepped realized violations under the cap") {
  // lambda_{t,i} >= eta * sum_{tau<t} traversed violations, by induction on
  // the ascent step, as long as the upper clamp never fires.
  const auto mdp = trend_mdp();
  const auto scenario = Scenario::from_json(mdp, trend_scenario_json());
  auto cfg = practical_config(800, 23);
  const auto record = run(mdp, scenario, cfg);
  const double eta = record.dual_step_size;
  const double cap = std::pow(800.0, 0.25);
  std::vector<double> traversed(mdp.num_constraints(), 0.0);
  bool clamped = false;
  for (const auto& ep : record.episodes) {
    for (int i = 0; i < mdp.num_constraints(); ++i) {
      clamped = clamped || ep.multipliers[i] >= cap - 1e-12;
      if (!clamped) CHECK(ep.multipliers[i] >= eta * traversed[i] - 1e-12);
      traversed[i] += ep.violation_traversed[i];
    }
  }
}
