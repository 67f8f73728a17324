#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "pdbps/cmdp.hpp"
#include "pdbps/confidence.hpp"
#include "pdbps/dual.hpp"
#include "pdbps/fspodb.hpp"
#include "pdbps/occupancy.hpp"
#include "pdbps/scenario.hpp"

namespace pdbps {

/// Which shift feeds the loss-range recurrence: the value the episode was
/// played with (pre-update) or the freshly updated one. The pre-update form
/// is the default; the post-update form is kept for sensitivity runs.
enum class XiVariant { PreUpdateShift, PostUpdateShift };

struct RunConfig {
  long num_episodes = 0;
  double delta = 0.05;
  ConstantMode mode = ConstantMode::Paper;
  double practical_scale = 1.0;      // C replacement in Practical mode
  double practical_dual_step = 0.0;  // 0 selects 1/sqrt(T)
  XiVariant xi_variant = XiVariant::PreUpdateShift;
  std::uint64_t seed = 0;
  bool record_occupancies = true;
  /// Soft multiplier bound (Lambda from the oracle); breaches are counted,
  /// not fatal, since the bound holds only with high probability.
  double lambda_cap_soft = std::numeric_limits<double>::infinity();
};

/// Scaled loss fed to the primal and its unscaled Lagrangian counterpart,
/// one entry per visited layer.
struct LagrangianLoss {
  std::vector<double> scaled;
  std::vector<double> unscaled;
};

LagrangianLoss build_losses(const Trajectory& traj, std::span<const double> multipliers,
                            double shift);

struct EpisodeRecord {
  long t = 0;
  double reward_exact = 0.0;                 // r_t . q_t under the true kernel
  std::vector<double> violation_exact;       // [G_t^T q_t]_i
  std::vector<double> violation_traversed;   // sum_h g_i(x_h, a_h); the dual gradient
  std::vector<double> multipliers;           // lambda_t, as used this episode
  double lambda_l1 = 0.0;
  double shift = 0.0;       // Gamma_t
  double loss_range = 0.0;  // Xi_t
  double learning_rate = 0.0;
  double max_q_estimate = 0.0;
  double max_bonus = 0.0;
  double floor_margin = 0.0;
};

struct RunRecord {
  RunConfig config;
  double dual_step_size = 0.0;
  std::vector<EpisodeRecord> episodes;
  std::vector<std::vector<double>> occupancies;  // per-episode q_t(x,a), optional
  std::vector<double> reward_sum;                // sum of realized reward vectors
  std::vector<double> constraint_sum;            // sum of realized G_t, m x pairs
  long soft_lambda_breaches = 0;
  long soft_bonus_breaches = 0;
};

/// One full primal-dual learner: policy optimization on the primal side,
/// projected gradient ascent on the dual side, with the shift/range
/// bookkeeping between them. The loop never branches on how the scenario
/// generates rewards or constraints.
class PdbpsLearner {
 public:
  PdbpsLearner(const LoopFreeCmdp& mdp, const RunConfig& config);

  const Policy& policy() const { return primal_->policy(); }
  const ConfidenceModel& model() const { return *model_; }
  const FsPodb& primal() const { return *primal_; }
  const DualOgd& dual() const { return *dual_; }
  double shift() const { return shift_; }
  double loss_range() const { return loss_range_; }
  long episode() const { return episode_; }

  /// Plays one episode against (reward, constraints) and performs the
  /// primal, dual, shift, and range updates in that order. Throws
  /// InvariantFailure if a structural invariant breaks (always a bug).
  EpisodeRecord run_episode(const RewardVector& reward, const ConstraintMatrix& constraints,
                            RngStream& traj_rng, RunRecord* sink = nullptr);

 private:
  const LoopFreeCmdp* mdp_;
  RunConfig config_;
  std::unique_ptr<ConfidenceModel> model_;
  std::unique_ptr<FsPodb> primal_;
  std::unique_ptr<DualOgd> dual_;
  double shift_ = 1.0;       // Gamma_1
  double loss_range_ = 2.0;  // Xi_1
  long episode_ = 0;
};

/// Runs the full loop for config.num_episodes episodes of the scenario.
RunRecord run(const LoopFreeCmdp& mdp, const Scenario& scenario, const RunConfig& config);

}  // namespace pdbps
