#include <doctest.h>

#include <cmath>

#include "pdbps/fspodb.hpp"
#include "pdbps/metrics.hpp"
#include "pdbps/occupancy.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace pdbps;
using namespace pdbps::testing;

namespace {
Trajectory make_traj(const LoopFreeCmdp& mdp, std::vector<std::pair<int, int>> path) {
  Trajectory traj;
  for (auto [x, a] : path)
    traj.steps.push_back({x, a, 0.0, std::vector<double>(mdp.num_constraints(), 0.0)});
  return traj;
}

ConfidenceModel collapsed_model(const LoopFreeCmdp& mdp, long T = 1000) {
  ConfidenceModel model(mdp, T, 0.1);
  auto doc = model.to_json();
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const auto row = mdp.kernel_row(pair);
    for (std::size_t j = 0; j < row.size(); ++j)
      doc["empirical"][mdp.triple_offset(pair) + static_cast<int>(j)] = row[j];
    doc["radius"][pair] = 0.0;
  }
  return ConfidenceModel::from_json(mdp, doc);
}
}  // namespace

TEST_CASE("zero losses give a zero estimate") {
  const auto mdp = fork_mdp();
  const auto model = collapsed_model(mdp);
  const auto upper = model.upper_occupancy(Policy::uniform(mdp));
  const auto traj = make_traj(mdp, {{0, 0}, {1, 1}});
  const std::vector<double> losses = {0.0, 0.0};
  const auto q_est = estimate_q(mdp, traj, losses, upper, 0.1);
  for (double v : q_est) CHECK(v == 0.0);
}

TEST_CASE("one-step estimate is loss over smoothed occupancy") {
  const auto mdp = chain_mdp();  // H=2 chain; second layer behaves like the H=1 case
  const auto model = collapsed_model(mdp);
  const auto upper = model.upper_occupancy(Policy::uniform(mdp));
  const auto traj = make_traj(mdp, {{0, 0}, {1, 0}});
  const std::vector<double> losses = {0.0, 1.0};
  const auto q_est = estimate_q(mdp, traj, losses, upper, 0.1);
  CHECK(q_est[mdp.pair_index(1, 0)] == doctest::Approx(1.0 / 1.1));
  CHECK(q_est[mdp.pair_index(0, 0)] == doctest::Approx(1.0 / 1.1));  // suffix includes step 1
}

TEST_CASE("estimates vanish off the visited trajectory") {
  const auto mdp = fork_mdp();
  const auto model = collapsed_model(mdp);
  const auto upper = model.upper_occupancy(Policy::uniform(mdp));
  const auto traj = make_traj(mdp, {{0, 1}, {2, 0}});
  const std::vector<double> losses = {0.5, 0.25};
  const auto q_est = estimate_q(mdp, traj, losses, upper, 0.05);
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const bool on_path = pair == mdp.pair_index(0, 1) || pair == mdp.pair_index(2, 0);
    CHECK((q_est[pair] != 0.0) == on_path);
  }
}

TEST_CASE("the estimator is optimistic in expectation (underestimates cost)") {
  // E[Qhat(x,a)] = q(x,a)/(qbar(x,a)+gamma) * Q(x,a) <= Q(x,a) when qbar >= q.
  const auto mdp = two_succ_mdp();
  const auto model = collapsed_model(mdp);
  RngStream gen(25, 0, StreamKind::Test);
  const auto pi = random_policy(mdp, gen);
  const auto upper = model.upper_occupancy(pi);

  // A fixed loss field over pairs; exact Q by backward induction under pi.
  std::vector<double> loss_field(mdp.num_pairs());
  for (double& v : loss_field) v = gen.uniform01();
  std::vector<double> value(mdp.num_states(), 0.0);
  std::vector<double> q_exact(mdp.num_pairs(), 0.0);
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    for (int x : mdp.layers()[h]) {
      const auto succ = mdp.successors(x);
      double vx = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        double qa = loss_field[pair];
        const auto row = mdp.kernel_row(pair);
        for (std::size_t j = 0; j < row.size(); ++j) qa += row[j] * value[succ[j]];
        q_exact[pair] = qa;
        vx += pi.probs[pair] * qa;
      }
      value[x] = vx;
    }
  }

  const double smoothing = 0.05;
  const RewardVector zero_r(std::vector<double>(mdp.num_pairs(), 0.0));
  const ConstraintMatrix no_g(1, std::vector<double>(mdp.num_pairs(), 0.0));
  const long n = 200000;
  std::vector<double> mean(mdp.num_pairs(), 0.0);
  for (long k = 0; k < n; ++k) {
    RngStream rng(27, static_cast<std::uint64_t>(k), StreamKind::Test);
    const auto traj = rollout(mdp, pi, zero_r, no_g, rng);
    std::vector<double> losses(traj.steps.size());
    for (std::size_t h = 0; h < traj.steps.size(); ++h)
      losses[h] = loss_field[mdp.pair_index(traj.steps[h].state, traj.steps[h].action)];
    const auto q_est = estimate_q(mdp, traj, losses, upper, smoothing);
    for (int pair = 0; pair < mdp.num_pairs(); ++pair) mean[pair] += q_est[pair];
  }
  const double sigma_slack = 3.0 / std::sqrt(static_cast<double>(n));
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    mean[pair] /= n;
    CHECK(mean[pair] <= q_exact[pair] + mdp.horizon() * sigma_slack);
  }
}

TEST_CASE("collapsed confidence set gives the closed-form bonus") {
  const auto mdp = fork_mdp();
  const auto model = collapsed_model(mdp);
  const auto pi = Policy::uniform(mdp);
  const auto upper = model.upper_occupancy(pi);
  const auto lower = model.lower_occupancy(pi);
  const double xi = 2.0, smoothing = 0.1;
  const auto bonus = compute_bonus(mdp, model, pi, xi, upper, lower, smoothing);

  const int horizon = mdp.horizon();
  for (int h = 0; h < horizon; ++h) {
    for (int x : mdp.layers()[h]) {
      double expect = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a)
        expect += pi.probs[mdp.pair_index(x, a)] * 3.0 * smoothing * horizon * xi /
                  (upper[mdp.pair_index(x, a)] + smoothing);
      CHECK(bonus.state_bonus[x] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  // Terminal bonus is zero by definition; the last layer's B equals b(x).
  for (int a = 0; a < mdp.num_actions(); ++a) {
    CHECK(bonus.dilated_bonus[mdp.pair_index(1, a)] ==
          doctest::Approx(bonus.state_bonus[1]).epsilon(1e-12));
  }
  // Root B = b(x0) + (1 + 1/H) * E_{x'}[E_{a'}[B(x',a')]] under the kernel.
  for (int a = 0; a < mdp.num_actions(); ++a) {
    const int pair = mdp.pair_index(0, a);
    const auto row = mdp.kernel_row(pair);
    double next = 0.0;
    const auto succ = mdp.successors(0);
    for (std::size_t j = 0; j < succ.size(); ++j) {
      double v = 0.0;
      for (int ap = 0; ap < mdp.num_actions(); ++ap)
        v += pi.probs[mdp.pair_index(succ[j], ap)] *
             bonus.dilated_bonus[mdp.pair_index(succ[j], ap)];
      next += row[j] * v;
    }
    CHECK(bonus.dilated_bonus[pair] ==
          doctest::Approx(bonus.state_bonus[0] + (1.0 + 1.0 / horizon) * next).epsilon(1e-12));
  }
}

TEST_CASE("bonus recursion is optimistic over the confidence ball") {
  // With radius 0.3 at the root, B must match a brute-force grid over the
  // ball applied to the next layer's expected bonus.
  const LoopFreeCmdp mdp({{0}, {1, 2}, {3}}, 2,
                         {{0.6, 0.4}, {0.3, 0.7}, {1.0}, {1.0}, {1.0}, {1.0}}, 1);
  ConfidenceModel model(mdp, 1000, 0.1);
  auto doc = model.to_json();
  doc["empirical"] = std::vector<double>{0.6, 0.4, 0.3, 0.7, 1.0, 1.0, 1.0, 1.0};
  doc["radius"] = std::vector<double>{0.3, 0.3, 0.0, 0.0, 0.0, 0.0};
  const auto frozen = ConfidenceModel::from_json(mdp, doc);
  RngStream gen(29, 0, StreamKind::Test);
  const auto pi = random_policy(mdp, gen);
  const auto upper = frozen.upper_occupancy(pi);
  const auto lower = frozen.lower_occupancy(pi);
  const auto bonus = compute_bonus(mdp, frozen, pi, 2.0, upper, lower, 0.05);

  for (int a = 0; a < 2; ++a) {
    const int pair = mdp.pair_index(0, a);
    std::vector<double> next(2);
    for (int j = 0; j < 2; ++j) {
      const int xp = mdp.successors(0)[j];
      next[j] = pi.probs[mdp.pair_index(xp, 0)] * bonus.dilated_bonus[mdp.pair_index(xp, 0)] +
                pi.probs[mdp.pair_index(xp, 1)] * bonus.dilated_bonus[mdp.pair_index(xp, 1)];
    }
    double grid_best = -1e300;
    for (int k = 0; k <= 1000; ++k) {
      const double p0 = k / 1000.0;
      const auto center = frozen.empirical(pair);
      if (std::abs(p0 - center[0]) + std::abs(1.0 - p0 - center[1]) > 0.3 + 1e-12) continue;
      grid_best = std::max(grid_best, p0 * next[0] + (1.0 - p0) * next[1]);
    }
    const double expected = bonus.state_bonus[0] + (1.0 + 1.0 / mdp.horizon()) * grid_best;
    CHECK(std::abs(bonus.dilated_bonus[pair] - expected) <= 2e-3);
    CHECK(bonus.dilated_bonus[pair] >= expected - 1e-9);
  }
}

TEST_CASE("loss range check") {
  CHECK(loss_range_check(std::vector<double>{0.0, 1.0, 2.0}, 2.0));
  CHECK_FALSE(loss_range_check(std::vector<double>{-0.1}, 2.0));
  CHECK_FALSE(loss_range_check(std::vector<double>{2.0 + 1e-9}, 2.0));
}

TEST_CASE("fixed share: equal drift pulls toward uniform") {
  const auto mdp = fork_mdp();
  std::vector<double> log_w(mdp.num_pairs(), 0.0);
  Policy pi;
  pi.probs = {0.8, 0.2, 0.5, 0.5, 0.3, 0.7};
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) log_w[pair] = std::log(pi.probs[pair]);
  const std::vector<double> q_est(mdp.num_pairs(), 0.7);
  const std::vector<double> bonus(mdp.num_pairs(), 0.7);  // Qhat == B
  const double sigma = 0.01;
  fixed_share_update(mdp, log_w, pi, q_est, bonus, 0.5, sigma);
  CHECK(pi.probs[0] == doctest::Approx((1.0 - sigma) * 0.8 + sigma / 2.0));
  CHECK(pi.probs[1] == doctest::Approx((1.0 - sigma) * 0.2 + sigma / 2.0));
}

TEST_CASE("sigma = 0 reduces to plain exponential weights") {
  const LoopFreeCmdp two_action({{0}, {1}, {2}}, 2, {{1.0}, {1.0}, {1.0}, {1.0}}, 1);
  std::vector<double> log_w(two_action.num_pairs(), std::log(0.5));
  auto pi = Policy::uniform(two_action);
  std::vector<double> q_est = {1.0, 0.0, 0.0, 0.0};
  std::vector<double> bonus(two_action.num_pairs(), 0.0);
  fixed_share_update(two_action, log_w, pi, q_est, bonus, 1.0, 0.0);
  const double e1 = std::exp(-1.0);
  CHECK(pi.probs[0] == doctest::Approx(e1 / (e1 + 1.0)));
  CHECK(pi.probs[1] == doctest::Approx(1.0 / (e1 + 1.0)));
}

TEST_CASE("extreme drifts stay finite in log space") {
  const LoopFreeCmdp two_action({{0}, {1}, {2}}, 2, {{1.0}, {1.0}, {1.0}, {1.0}}, 1);
  std::vector<double> log_w(two_action.num_pairs(), std::log(0.5));
  auto pi = Policy::uniform(two_action);
  std::vector<double> q_est = {800.0, 0.0, 0.0, 0.0};
  std::vector<double> bonus = {0.0, 300.0, 0.0, 0.0};
  fixed_share_update(two_action, log_w, pi, q_est, bonus, 1.0, 1e-4);
  CHECK(std::isfinite(pi.probs[0]));
  CHECK(pi.probs[0] >= 1e-4 / 2.0);
  CHECK(pi.probs[0] + pi.probs[1] == doctest::Approx(1.0));
  fixed_share_update(two_action, log_w, pi, q_est, bonus, 1.0, 1e-4);
  CHECK(std::isfinite(pi.probs[0]));
}

TEST_CASE("oracle mode: collapsed set with sigma 0 equals textbook EW on exact Q") {
  const auto mdp = two_succ_mdp();
  auto model = collapsed_model(mdp);
  RngStream gen(33, 0, StreamKind::Test);

  // Exact Q of a fixed loss field under the current policy, recomputed per
  // round; textbook exponential weights applied state by state.
  std::vector<double> loss_field(mdp.num_pairs());
  for (double& v : loss_field) v = gen.uniform01();

  auto pi = Policy::uniform(mdp);
  std::vector<double> log_w(mdp.num_pairs(), -std::log(2.0));
  auto reference_pi = pi;
  std::vector<double> reference_w(mdp.num_pairs(), 1.0);

  const double eta = 0.3;
  for (int round = 0; round < 5; ++round) {
    std::vector<double> value(mdp.num_states(), 0.0);
    std::vector<double> q_exact(mdp.num_pairs(), 0.0);
    for (int h = mdp.horizon() - 1; h >= 0; --h) {
      for (int x : mdp.layers()[h]) {
        const auto succ = mdp.successors(x);
        double vx = 0.0;
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const int pair = mdp.pair_index(x, a);
          double qa = loss_field[pair];
          const auto row = mdp.kernel_row(pair);
          for (std::size_t j = 0; j < row.size(); ++j) qa += row[j] * value[succ[j]];
          q_exact[pair] = qa;
          vx += reference_pi.probs[pair] * qa;
        }
        value[x] = vx;
      }
    }
    const std::vector<double> zero(mdp.num_pairs(), 0.0);
    fixed_share_update(mdp, log_w, pi, q_exact, zero, eta, 0.0);
    for (int h = 0; h < mdp.horizon(); ++h) {
      for (int x : mdp.layers()[h]) {
        double norm = 0.0;
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const int pair = mdp.pair_index(x, a);
          reference_w[pair] *= std::exp(-eta * q_exact[pair]);
          norm += reference_w[pair];
        }
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const int pair = mdp.pair_index(x, a);
          reference_pi.probs[pair] = reference_w[pair] / norm;
        }
      }
    }
    for (int pair = 0; pair < mdp.num_pairs(); ++pair)
      CHECK(pi.probs[pair] == doctest::Approx(reference_pi.probs[pair]).epsilon(1e-9));
  }
}

TEST_CASE("full update keeps the floor and the step-size caps") {
  const auto mdp = two_succ_mdp();
  const long T = 500;
  ConfidenceModel model(mdp, T, 0.1);
  FsPodb primal(mdp, model, T, ConstantMode::Paper);
  const double floor = primal.uniform_share() / mdp.num_actions();

  const RewardVector r(std::vector<double>(mdp.num_pairs(), 0.5));
  const ConstraintMatrix g(1, std::vector<double>(mdp.num_pairs(), 0.5));
  for (long t = 1; t <= 60; ++t) {
    RngStream rng(35, static_cast<std::uint64_t>(t), StreamKind::Test);
    const auto traj = rollout(mdp, primal.policy(), r, g, rng);
    std::vector<double> losses(traj.steps.size(), 0.0);
    for (std::size_t h = 0; h < traj.steps.size(); ++h)
      losses[h] = 1.0 - traj.steps[h].reward + 0.3;
    const auto diag = primal.update(traj, losses, 2.0);
    CHECK(diag.learning_rate * diag.max_q_estimate <= 0.5 + 1e-9);
    CHECK(diag.learning_rate * diag.max_bonus <= 0.5 / mdp.horizon() + 1e-9);
    if (t >= 2) {
      CHECK(diag.floor_margin >= 0.0);
      for (double p : primal.policy().probs) CHECK(p >= floor);
    }
  }
}

TEST_CASE("interval regret on a fixed adversarial loss sequence is sublinear") {
  // Standalone primal learner fed raw losses in [0, 1] (range fixed to 1),
  // against piecewise loss phases that move the best fixed policy around.
  const auto mdp = trend_mdp();
  const long T = 1 << 14;
  ConfidenceModel model(mdp, T, 0.05);
  FsPodb primal(mdp, model, T, ConstantMode::Practical, 0.25);

  std::vector<double> phase_a(mdp.num_pairs()), phase_b(mdp.num_pairs());
  RngStream gen(91, 0, StreamKind::Test);
  for (int p = 0; p < mdp.num_pairs(); ++p) {
    phase_a[p] = 0.1 + 0.8 * gen.uniform01();
    phase_b[p] = 0.9 - phase_a[p] + 0.05;  // roughly anti-correlated phases
  }
  auto loss_at = [&](long t) -> const std::vector<double>& {
    return ((t - 1) / 2048) % 2 == 0 ? phase_a : phase_b;
  };

  std::vector<double> exact_loss(T, 0.0);  // <loss_t, q_t> under the true kernel
  std::vector<std::vector<double>> q2s;
  q2s.reserve(T);
  for (long t = 1; t <= T; ++t) {
    const auto& field = loss_at(t);
    const auto q = occupancy_from_policy(mdp, primal.policy());
    exact_loss[t - 1] = evaluate(mdp, q, field);
    q2s.push_back(q.q2);

    RngStream rng(93, static_cast<std::uint64_t>(t), StreamKind::Test);
    const auto traj = rollout(mdp, primal.policy(), RewardVector(field),
                              ConstraintMatrix(1, std::vector<double>(mdp.num_pairs(), 0.0)),
                              rng);
    std::vector<double> losses(traj.steps.size());
    for (std::size_t h = 0; h < traj.steps.size(); ++h)
      losses[h] = traj.steps[h].reward;  // the rolled-out field is the loss
    primal.update(traj, losses, 1.0);
  }

  const auto policies = enumerate_deterministic_policies(mdp);
  std::vector<std::vector<double>> det_q2;
  for (const auto& pi : policies) det_q2.push_back(occupancy_from_policy(mdp, pi).q2);

  const std::vector<std::pair<long, long>> intervals = {
      {1, T}, {T / 4 + 1, 3 * T / 4}, {T / 2 + 1, T}};
  for (const auto& [t1, t2] : intervals) {
    // Best fixed occupancy for the interval's summed losses.
    std::vector<double> total(mdp.num_pairs(), 0.0);
    for (long t = t1; t <= t2; ++t)
      for (int p = 0; p < mdp.num_pairs(); ++p) total[p] += loss_at(t)[p];
    double best = 1e300;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < det_q2.size(); ++j) {
      double v = 0.0;
      for (int p = 0; p < mdp.num_pairs(); ++p) v += det_q2[j][p] * total[p];
      if (v < best) {
        best = v;
        best_j = j;
      }
    }
    std::vector<double> curve(t2 - t1 + 1, 0.0);
    double acc = 0.0;
    for (long t = t1; t <= t2; ++t) {
      double comparator = 0.0;
      for (int p = 0; p < mdp.num_pairs(); ++p)
        comparator += det_q2[best_j][p] * loss_at(t)[p];
      acc += exact_loss[t - 1] - comparator;
      curve[t - t1] = acc;
    }
    const auto fit = slope_fit(curve, 32, t2 - t1 + 1);
    CHECK(fit.slope < 0.9);
  }
}
