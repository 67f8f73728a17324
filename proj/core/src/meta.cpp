#include "pdbps/meta.hpp"

#include <algorithm>
#include <cmath>

namespace pdbps {

LagrangianLoss build_losses(const Trajectory& traj, std::span<const double> multipliers,
                            double shift) {
  LagrangianLoss out;
  out.scaled.reserve(traj.steps.size());
  out.unscaled.reserve(traj.steps.size());
  for (const auto& step : traj.steps) {
    if (step.violations.size() != multipliers.size())
      throw StructuralError("losses: multiplier count does not match the feedback");
    double lag = -step.reward;
    for (std::size_t i = 0; i < multipliers.size(); ++i)
      lag += multipliers[i] * step.violations[i];
    out.unscaled.push_back(lag);
    out.scaled.push_back(shift + lag);
  }
  return out;
}

PdbpsLearner::PdbpsLearner(const LoopFreeCmdp& mdp, const RunConfig& config)
    : mdp_(&mdp), config_(config) {
  if (config.num_episodes <= 0) throw StructuralError("run: num_episodes must be positive");
  model_ = std::make_unique<ConfidenceModel>(mdp, config.num_episodes, config.delta);
  primal_ = std::make_unique<FsPodb>(mdp, *model_, config.num_episodes, config.mode,
                                     config.practical_scale);
  dual_ = std::make_unique<DualOgd>(mdp.num_constraints(), mdp.horizon(), mdp.num_states(),
                                    mdp.num_actions(), config.num_episodes, config.delta,
                                    config.mode, config.practical_dual_step);
}

EpisodeRecord PdbpsLearner::run_episode(const RewardVector& reward,
                                        const ConstraintMatrix& constraints,
                                        RngStream& traj_rng, RunRecord* sink) {
  ++episode_;
  const int m = mdp_->num_constraints();

  EpisodeRecord rec;
  rec.t = episode_;
  rec.multipliers.assign(dual_->multipliers().begin(), dual_->multipliers().end());
  rec.lambda_l1 = dual_->l1_norm();
  rec.shift = shift_;
  rec.loss_range = loss_range_;
  if (std::abs(shift_ - (1.0 + rec.lambda_l1)) > 1e-9)
    throw InvariantFailure("meta: shift out of sync with the multipliers");

  // Exact occupancy of the played policy under the true kernel; metrics are
  // defined through it, never through estimates.
  const auto q = occupancy_from_policy(*mdp_, policy());
  rec.reward_exact = evaluate(*mdp_, q, reward.values);
  rec.violation_exact.resize(m);
  for (int i = 0; i < m; ++i)
    rec.violation_exact[i] = evaluate(*mdp_, q, constraints.row(i));

  const auto traj = rollout(*mdp_, policy(), reward, constraints, traj_rng);
  const auto losses = build_losses(traj, dual_->multipliers(), shift_);
  if (!loss_range_check(losses.scaled, loss_range_))
    throw InvariantFailure("meta: scaled loss outside [0, Xi] at episode " +
                           std::to_string(episode_));

  const auto diag = primal_->update(traj, losses.scaled, loss_range_);
  rec.learning_rate = diag.learning_rate;
  rec.max_q_estimate = diag.max_q_estimate;
  rec.max_bonus = diag.max_bonus;
  rec.floor_margin = diag.floor_margin;

  rec.violation_traversed.assign(m, 0.0);
  for (const auto& step : traj.steps)
    for (int i = 0; i < m; ++i) rec.violation_traversed[i] += step.violations[i];

  const double l1_before = dual_->l1_norm();
  dual_->step(rec.violation_traversed);
  const double l1_after = dual_->l1_norm();
  if (l1_after - l1_before >
      m * mdp_->horizon() * dual_->step_size() + 1e-12)
    throw InvariantFailure("meta: multiplier l1 increment exceeded m H eta");
  for (double l : dual_->multipliers())
    if (l < 0.0 || l > dual_->cap())
      throw InvariantFailure("meta: multiplier left the box");

  shift_ = 1.0 + l1_after;
  const double candidate =
      config_.xi_variant == XiVariant::PreUpdateShift ? 2.0 * rec.shift : 2.0 * shift_;
  loss_range_ = std::max(loss_range_, candidate);

  if (sink != nullptr) {
    if (rec.lambda_l1 > config_.lambda_cap_soft) ++sink->soft_lambda_breaches;
    sink->soft_bonus_breaches += diag.soft_breaches;
    if (config_.record_occupancies) sink->occupancies.push_back(q.q2);
    if (sink->reward_sum.empty()) {
      sink->reward_sum.assign(mdp_->num_pairs(), 0.0);
      sink->constraint_sum.assign(constraints.values.size(), 0.0);
    }
    for (int p = 0; p < mdp_->num_pairs(); ++p) sink->reward_sum[p] += reward.values[p];
    for (std::size_t j = 0; j < constraints.values.size(); ++j)
      sink->constraint_sum[j] += constraints.values[j];
  }
  return rec;
}

RunRecord run(const LoopFreeCmdp& mdp, const Scenario& scenario, const RunConfig& config) {
  RunRecord record;
  record.config = config;
  PdbpsLearner learner(mdp, config);
  record.dual_step_size = learner.dual().step_size();
  record.episodes.reserve(config.num_episodes);
  for (long t = 1; t <= config.num_episodes; ++t) {
    RngStream scenario_rng(config.seed, static_cast<std::uint64_t>(t), StreamKind::Scenario);
    RngStream traj_rng(config.seed, static_cast<std::uint64_t>(t), StreamKind::Trajectory);
    const auto reward = scenario.reward_at(t, scenario_rng, &learner.policy());
    const auto constraints = scenario.constraints_at(t, scenario_rng);
    record.episodes.push_back(learner.run_episode(reward, constraints, traj_rng, &record));
  }
  return record;
}

}  // namespace pdbps
