#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdbps/cmdp.hpp"

namespace pdbps {

/// Per-episode reward/constraint source. Rewards and constraints are
/// configured independently as either stochastic samplers with known means
/// or adversarial sequences/generators. Adversarial generators are oblivious
/// (a pure function of t) unless the opt-in adaptive kind is selected, which
/// reads the current policy and therefore breaks replay-from-parameters.
class Scenario {
 public:
  enum class Kind {
    StochasticBernoulli,
    StochasticBeta,       // rewards only
    PeriodicFlip,         // phases alternating in blocks of `period`
    Piecewise,            // phases switching at breakpoints
    Sequence,             // explicit per-episode values
    AdaptiveDip,          // rewards only: dips rewards on likely actions
  };

  static Scenario from_json(const LoopFreeCmdp& mdp, const nlohmann::json& doc);
  nlohmann::json to_json() const;

  bool rewards_stochastic() const;
  bool constraints_stochastic() const;
  bool adaptive() const { return reward_kind_ == Kind::AdaptiveDip; }

  /// Episodes are 1-based. The policy is only consulted by adaptive kinds.
  RewardVector reward_at(long t, RngStream& rng, const Policy* policy = nullptr) const;
  ConstraintMatrix constraints_at(long t, RngStream& rng) const;

  /// Mean reward rbar: the distribution mean when stochastic, the average
  /// over episodes 1..T when adversarial. Throws for adaptive rewards.
  RewardVector mean_reward(long num_episodes) const;
  ConstraintMatrix mean_constraints(long num_episodes) const;

  /// The full adversarial constraint sequence (weak-baseline input).
  /// Throws for stochastic constraints.
  std::vector<ConstraintMatrix> constraint_sequence(long num_episodes) const;

 private:
  const LoopFreeCmdp* mdp_ = nullptr;

  Kind reward_kind_ = Kind::StochasticBernoulli;
  std::vector<double> reward_means_;               // stochastic kinds, or adaptive base
  double beta_concentration_ = 8.0;
  long reward_period_ = 1;
  std::vector<long> reward_breakpoints_;
  std::vector<std::vector<double>> reward_phases_;  // also the explicit sequence
  double adaptive_depth_ = 0.5;

  Kind constraint_kind_ = Kind::StochasticBernoulli;
  std::vector<double> constraint_means_;            // m x pairs, row-major
  long constraint_period_ = 1;
  std::vector<long> constraint_breakpoints_;
  std::vector<std::vector<double>> constraint_phases_;

  std::size_t reward_phase_index(long t) const;
  std::size_t constraint_phase_index(long t) const;
};

}  // namespace pdbps
