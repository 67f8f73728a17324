#include "pdbps/fspodb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pdbps {

std::vector<double> estimate_q(const LoopFreeCmdp& mdp, const Trajectory& traj,
                               std::span<const double> losses,
                               std::span<const double> upper_occ, double smoothing) {
  if (losses.size() != traj.steps.size())
    throw StructuralError("estimate_q: one loss per visited layer expected");
  if (static_cast<int>(upper_occ.size()) != mdp.num_pairs())
    throw StructuralError("estimate_q: upper occupancy does not match the mdp");

  std::vector<double> q_est(mdp.num_pairs(), 0.0);
  double suffix = 0.0;
  for (int h = static_cast<int>(traj.steps.size()) - 1; h >= 0; --h) {
    suffix += losses[h];
    const int pair = mdp.pair_index(traj.steps[h].state, traj.steps[h].action);
    q_est[pair] = suffix / (upper_occ[pair] + smoothing);
  }
  return q_est;
}

BonusResult compute_bonus(const LoopFreeCmdp& mdp, const ConfidenceModel& model,
                          const Policy& policy, double loss_range,
                          std::span<const double> upper_occ,
                          std::span<const double> lower_occ, double smoothing) {
  const int horizon = mdp.horizon();
  BonusResult out;
  out.state_bonus.assign(mdp.num_states(), 0.0);
  out.dilated_bonus.assign(mdp.num_pairs(), 0.0);

  for (int h = 0; h < horizon; ++h) {
    for (int x : mdp.layers()[h]) {
      double b = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        const double width = upper_occ[pair] - lower_occ[pair];
        b += policy.probs[pair] * (3.0 * smoothing * horizon * loss_range +
                                   horizon * loss_range * width) /
             (upper_occ[pair] + smoothing);
      }
      out.state_bonus[x] = b;
    }
  }

  // Backward recursion; B at the terminal layer is identically zero.
  const double dilation = 1.0 + 1.0 / horizon;
  for (int h = horizon - 1; h >= 0; --h) {
    const auto& next_layer = mdp.layers()[h + 1];
    std::vector<double> next_value(next_layer.size(), 0.0);
    if (h + 1 < horizon) {
      for (int pos = 0; pos < static_cast<int>(next_layer.size()); ++pos) {
        const int xp = next_layer[pos];
        double v = 0.0;
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const int pair = mdp.pair_index(xp, a);
          v += policy.probs[pair] * out.dilated_bonus[pair];
        }
        next_value[pos] = v;
      }
    }
    for (int x : mdp.layers()[h]) {
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        out.dilated_bonus[pair] =
            out.state_bonus[x] + dilation * model.max_expectation(pair, next_value);
      }
    }
  }
  return out;
}

bool loss_range_check(std::span<const double> losses, double loss_range) {
  for (double l : losses)
    if (!(l >= 0.0 && l <= loss_range)) return false;
  return true;
}

void fixed_share_update(const LoopFreeCmdp& mdp, std::vector<double>& log_weights,
                        Policy& policy, std::span<const double> q_estimate,
                        std::span<const double> dilated_bonus, double learning_rate,
                        double uniform_share) {
  const int na = mdp.num_actions();
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      const int base = mdp.pair_index(x, 0);
      double max_lw = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < na; ++a) {
        const int pair = base + a;
        const double lw =
            log_weights[pair] - learning_rate * (q_estimate[pair] - dilated_bonus[pair]);
        log_weights[pair] = lw;
        max_lw = std::max(max_lw, lw);
      }
      double norm = 0.0;
      for (int a = 0; a < na; ++a) norm += std::exp(log_weights[base + a] - max_lw);
      const double log_norm = max_lw + std::log(norm);
      if (uniform_share == 0.0) {
        for (int a = 0; a < na; ++a) {
          log_weights[base + a] -= log_norm;
          policy.probs[base + a] = std::exp(log_weights[base + a]);
        }
      } else {
        // The mixture keeps the floor share/|A| exact; storing normalized
        // weights is equivalent because the update is scale-invariant.
        for (int a = 0; a < na; ++a) {
          const double mixed = (1.0 - uniform_share) * std::exp(log_weights[base + a] - log_norm) +
                               uniform_share / na;
          policy.probs[base + a] = mixed;
          log_weights[base + a] = std::log(mixed);
        }
      }
    }
  }
}

FsPodb::FsPodb(const LoopFreeCmdp& mdp, ConfidenceModel& model, long num_episodes,
               ConstantMode mode, double practical_scale)
    : mdp_(&mdp),
      model_(&model),
      num_episodes_(num_episodes),
      mode_(mode),
      policy_(Policy::uniform(mdp)) {
  if (num_episodes_ <= 0) throw StructuralError("fspodb: num_episodes must be positive");
  scale_c_ = mode == ConstantMode::Paper
                 ? 252.0 * mdp.num_states() * mdp.num_actions() * mdp.horizon()
                 : practical_scale;
  if (scale_c_ <= 0.0) throw StructuralError("fspodb: scale constant must be positive");
  smoothing_ = 1.0 / (scale_c_ * std::sqrt(static_cast<double>(num_episodes_)));
  uniform_share_ = 1.0 / static_cast<double>(num_episodes_);
  log_weights_.assign(mdp.num_pairs(), -std::log(static_cast<double>(mdp.num_actions())));
}

double FsPodb::learning_rate(double loss_range) const {
  return 1.0 / (2.0 * mdp_->horizon() * loss_range * scale_c_ *
                std::sqrt(static_cast<double>(num_episodes_)));
}

FsPodb::Diagnostics FsPodb::update(const Trajectory& traj, std::span<const double> losses,
                                   double loss_range) {
  if (!loss_range_check(losses, loss_range))
    throw InvariantFailure("fspodb: a loss fell outside [0, " + std::to_string(loss_range) +
                           "]");
  const double eta = learning_rate(loss_range);
  const auto upper = model_->upper_occupancy(policy_);
  const auto lower = model_->lower_occupancy(policy_);
  const auto q_est = estimate_q(*mdp_, traj, losses, upper, smoothing_);
  const auto bonus =
      compute_bonus(*mdp_, *model_, policy_, loss_range, upper, lower, smoothing_);

  Diagnostics diag;
  diag.learning_rate = eta;
  for (int pair = 0; pair < mdp_->num_pairs(); ++pair) {
    diag.max_q_estimate = std::max(diag.max_q_estimate, q_est[pair]);
    diag.max_bonus = std::max(diag.max_bonus, bonus.dilated_bonus[pair]);
  }
  // eta * Qhat <= 1/2 holds in both modes because eta and the smoothing
  // share the same scale; the bonus bound relies on the Paper constants,
  // so in Practical mode an excess is only counted.
  if (eta * diag.max_q_estimate > 0.5 + 1e-9)
    throw InvariantFailure("fspodb: learning_rate * q_estimate exceeded 1/2");
  if (eta * diag.max_bonus > 0.5 / mdp_->horizon() + 1e-9) {
    if (mode_ == ConstantMode::Paper)
      throw InvariantFailure("fspodb: learning_rate * bonus exceeded 1/(2H)");
    ++diag.soft_breaches;
  }

  fixed_share_update(*mdp_, log_weights_, policy_, q_est, bonus.dilated_bonus, eta,
                     uniform_share_);
  const double floor = uniform_share_ / mdp_->num_actions();
  double margin = std::numeric_limits<double>::infinity();
  for (double p : policy_.probs) margin = std::min(margin, p - floor);
  diag.floor_margin = margin;
  if (margin < 0.0) throw InvariantFailure("fspodb: policy floor breached");

  model_->update(traj);
  return diag;
}

}  // namespace pdbps
