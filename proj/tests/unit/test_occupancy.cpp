#include <doctest.h>

#include <cmath>

#include "pdbps/occupancy.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace pdbps;
using namespace pdbps::testing;

TEST_CASE("chain occupancy is the unit path") {
  const auto mdp = chain_mdp();
  const auto q = occupancy_from_policy(mdp, Policy::uniform(mdp));
  for (double v : q.q3) CHECK(v == doctest::Approx(1.0));
  CHECK_NOTHROW(q.validate(mdp));
}

TEST_CASE("uniform policy splits the deterministic fork evenly") {
  const auto mdp = fork_mdp();
  const auto q = occupancy_from_policy(mdp, Policy::uniform(mdp));
  CHECK(q.q2[mdp.pair_index(0, 0)] == doctest::Approx(0.5));
  CHECK(q.q2[mdp.pair_index(0, 1)] == doctest::Approx(0.5));
}

TEST_CASE("occupancy matches visit frequencies over a million rollouts") {
  const auto mdp = two_succ_mdp();
  RngStream gen(5, 0, StreamKind::Test);
  const auto pi = random_policy(mdp, gen);
  const auto q = occupancy_from_policy(mdp, pi);

  const RewardVector zero_r(std::vector<double>(mdp.num_pairs(), 0.0));
  const ConstraintMatrix no_g(1, std::vector<double>(mdp.num_pairs(), 0.0));
  const long n = 1000000;
  std::vector<long> visits(mdp.num_pairs(), 0);
  for (long k = 0; k < n; ++k) {
    RngStream rng(17, static_cast<std::uint64_t>(k), StreamKind::Test);
    const auto traj = rollout(mdp, pi, zero_r, no_g, rng);
    for (const auto& step : traj.steps) ++visits[mdp.pair_index(step.state, step.action)];
  }
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const double freq = static_cast<double>(visits[pair]) / n;
    const double se = std::sqrt(std::max(freq * (1.0 - freq), 1e-9) / n);
    CHECK(std::abs(freq - q.q2[pair]) <= 3.0 * se);
  }
}

TEST_CASE("round trip recovers the policy and kernel on reachable states") {
  const auto mdp = two_succ_mdp();
  RngStream gen(6, 0, StreamKind::Test);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pi = random_policy(mdp, gen);
    const auto q = occupancy_from_policy(mdp, pi);
    const auto [pi2, kernel2] = policy_from_occupancy(mdp, q);
    for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
      if (q.q1[mdp.pair_state(pair)] <= 0.0) continue;
      CHECK(pi2.probs[pair] == doctest::Approx(pi.probs[pair]).epsilon(1e-9));
      if (q.q2[pair] > 0.0) {
        const auto row = mdp.kernel_row(pair);
        for (std::size_t j = 0; j < kernel2[pair].size(); ++j)
          CHECK(kernel2[pair][j] == doctest::Approx(row[j]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("hand-built occupancy inverts to the exact ratios") {
  // Fork structure, mass 0.6/0.4 at the root, asymmetric middle kernels.
  const auto mdp = fork_mdp();
  std::vector<double> q3(mdp.num_triples(), 0.0);
  q3[mdp.triple_index(mdp.pair_index(0, 0), 0)] = 0.6;  // x0,a0 -> x1
  q3[mdp.triple_index(mdp.pair_index(0, 1), 1)] = 0.4;  // x0,a1 -> x2
  q3[mdp.triple_index(mdp.pair_index(1, 0), 0)] = 0.45;
  q3[mdp.triple_index(mdp.pair_index(1, 1), 0)] = 0.15;
  q3[mdp.triple_index(mdp.pair_index(2, 0), 0)] = 0.1;
  q3[mdp.triple_index(mdp.pair_index(2, 1), 0)] = 0.3;
  const auto q = OccupancyMeasure::from_q3(mdp, q3);
  const auto [pi, kernel] = policy_from_occupancy(mdp, q);
  CHECK(pi.probs[mdp.pair_index(0, 0)] == doctest::Approx(0.6));
  CHECK(pi.probs[mdp.pair_index(1, 0)] == doctest::Approx(0.75));  // 0.45 / 0.6
  CHECK(pi.probs[mdp.pair_index(2, 1)] == doctest::Approx(0.75));  // 0.3 / 0.4
  CHECK(kernel[mdp.pair_index(0, 0)][0] == doctest::Approx(1.0));
}

TEST_CASE("zero-mass pairs fall back to uniform") {
  const auto mdp = fork_mdp();
  Policy pi;
  pi.probs = {1.0, 0.0, 0.5, 0.5, 0.5, 0.5};  // never plays a1 at the root
  const auto q = occupancy_from_policy(mdp, pi);
  CHECK(q.q1[2] == doctest::Approx(0.0));
  const auto [pi2, kernel2] = policy_from_occupancy(mdp, q);
  CHECK(pi2.probs[mdp.pair_index(2, 0)] == doctest::Approx(0.5));
  CHECK(pi2.probs[mdp.pair_index(2, 1)] == doctest::Approx(0.5));
  CHECK(kernel2[mdp.pair_index(0, 1)][0] == doctest::Approx(0.5));
}

TEST_CASE("validation names the violated condition") {
  const auto mdp = fork_mdp();
  auto q = occupancy_from_policy(mdp, Policy::uniform(mdp));
  auto broken = q;
  for (double& v : broken.q3) v *= 0.5;
  broken = OccupancyMeasure::from_q3(mdp, broken.q3);
  CHECK_THROWS_WITH_AS(broken.validate(mdp),
                       doctest::Contains("condition (i)"), ValidationError);

  auto unbalanced = q.q3;
  unbalanced[mdp.triple_index(mdp.pair_index(0, 0), 0)] = 0.6;
  unbalanced[mdp.triple_index(mdp.pair_index(0, 1), 1)] = 0.4;
  // Layer mass still 1, but the middle outflows no longer match inflows.
  auto q2 = OccupancyMeasure::from_q3(mdp, unbalanced);
  CHECK_THROWS_WITH_AS(q2.validate(mdp), doctest::Contains("condition (ii)"), ValidationError);
}

TEST_CASE("evaluate: constants, zero, and a Monte-Carlo cross-check") {
  const auto mdp = two_succ_mdp();
  RngStream gen(8, 0, StreamKind::Test);
  const auto pi = random_policy(mdp, gen);
  const auto q = occupancy_from_policy(mdp, pi);

  const std::vector<double> ones(mdp.num_pairs(), 1.0);
  CHECK(evaluate(mdp, q, ones) == doctest::Approx(mdp.horizon()).epsilon(1e-12));
  const std::vector<double> zeros(mdp.num_pairs(), 0.0);
  CHECK(evaluate(mdp, q, zeros) == 0.0);

  std::vector<double> f(mdp.num_pairs());
  for (double& v : f) v = gen.uniform01();
  const auto mc = mc_mean_path_sum(mdp, pi, f, 200000, 23);
  CHECK(std::abs(evaluate(mdp, q, f) - mc.mean) <= 3.0 * mc.std_error);
}

TEST_CASE("evaluate rejects mismatched dimensions") {
  const auto mdp = fork_mdp();
  const auto q = occupancy_from_policy(mdp, Policy::uniform(mdp));
  const std::vector<double> wrong(mdp.num_pairs() + 1, 0.0);
  CHECK_THROWS_AS(evaluate(mdp, q, wrong), StructuralError);
}

TEST_CASE("random occupancies always validate") {
  RngStream gen(77, 0, StreamKind::Test);
  for (int rep = 0; rep < 40; ++rep) {
    const auto mdp = random_mdp(gen, 3, 4, 3, 1);
    const auto pi = random_policy(mdp, gen);
    const auto q = occupancy_from_policy(mdp, pi);
    CHECK_NOTHROW(q.validate(mdp));
  }
}
