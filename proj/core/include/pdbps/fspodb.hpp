#pragma once

#include <span>
#include <vector>

#include "pdbps/cmdp.hpp"
#include "pdbps/confidence.hpp"

namespace pdbps {

/// `Paper` uses the theory constants verbatim; `Practical` replaces the
/// scale constants with configurable ones so learning is visible at desk
/// scale. Invariant suites run in Paper mode, trend experiments in Practical.
enum class ConstantMode { Paper, Practical };

/// Importance-weighted optimistic cost-to-go estimate: zero off the visited
/// trajectory, suffix-loss over smoothed upper occupancy on it.
std::vector<double> estimate_q(const LoopFreeCmdp& mdp, const Trajectory& traj,
                               std::span<const double> losses,
                               std::span<const double> upper_occ, double smoothing);

struct BonusResult {
  std::vector<double> state_bonus;    // b(x), zero at the terminal state
  std::vector<double> dilated_bonus;  // B(x,a) over pairs
};

/// Exploration bonus driven by the transition uncertainty, amplified by
/// (1 + 1/H) per layer through a backward recursion that is optimistic over
/// the same confidence set used for the occupancy bounds.
BonusResult compute_bonus(const LoopFreeCmdp& mdp, const ConfidenceModel& model,
                          const Policy& policy, double loss_range,
                          std::span<const double> upper_occ,
                          std::span<const double> lower_occ, double smoothing);

/// True iff every loss lies in [0, loss_range].
bool loss_range_check(std::span<const double> losses, double loss_range);

/// Per-state exponential-weights step mixed with a `uniform_share` fraction
/// of uniform mass. Weights live in log space; `uniform_share = 0` reduces to
/// plain exponential weights. Policy floor uniform_share/|A| is exact.
void fixed_share_update(const LoopFreeCmdp& mdp, std::vector<double>& log_weights,
                        Policy& policy, std::span<const double> q_estimate,
                        std::span<const double> dilated_bonus, double learning_rate,
                        double uniform_share);

/// Policy-optimization primal learner: optimistic loss estimates, dilated
/// bonuses, and the fixed-share update, with the loss-range-aware learning
/// rate schedule. Owns the policy; the transition model is shared with the
/// surrounding loop and updated here after each policy step.
class FsPodb {
 public:
  struct Diagnostics {
    double learning_rate = 0.0;
    double max_q_estimate = 0.0;
    double max_bonus = 0.0;
    double floor_margin = 0.0;  // min over pairs of pi - share/|A|
    int soft_breaches = 0;      // practical-mode eta*B excesses
  };

  FsPodb(const LoopFreeCmdp& mdp, ConfidenceModel& model, long num_episodes,
         ConstantMode mode, double practical_scale = 1.0);

  const Policy& policy() const { return policy_; }
  double scale_c() const { return scale_c_; }
  double smoothing() const { return smoothing_; }
  double uniform_share() const { return uniform_share_; }
  double learning_rate(double loss_range) const;

  /// One update round: estimates, bonuses, fixed-share step, then the
  /// transition counters. Throws InvariantFailure when a bound that must
  /// hold by construction fails.
  Diagnostics update(const Trajectory& traj, std::span<const double> losses,
                     double loss_range);

 private:
  const LoopFreeCmdp* mdp_;
  ConfidenceModel* model_;
  long num_episodes_;
  ConstantMode mode_;
  double scale_c_;
  double smoothing_;
  double uniform_share_;
  std::vector<double> log_weights_;
  Policy policy_;
};

}  // namespace pdbps
