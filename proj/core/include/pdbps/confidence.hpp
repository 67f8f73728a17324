#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "pdbps/cmdp.hpp"

namespace pdbps {

/// Epoch-based transition estimate with per-pair L1 confidence sets
///   { p : ||p - empirical(x,a)||_1 <= radius(x,a) }.
/// Counters accumulate every episode; the empirical kernel and radii are
/// frozen at epoch boundaries, and a new epoch starts whenever any pair's
/// visit count doubles since the epoch began. Only the layer structure of
/// the MDP is consulted, never its true kernel.
class ConfidenceModel {
 public:
  ConfidenceModel(const LoopFreeCmdp& mdp, long num_episodes, double delta);

  /// Folds one trajectory into the counters and advances the epoch when the
  /// doubling rule fires.
  void update(const Trajectory& traj);

  int epoch() const { return epoch_; }
  long count(int pair) const { return visits_[pair]; }
  double delta() const { return delta_; }

  /// Frozen empirical distribution over the successor layer, by position.
  std::span<const double> empirical(int pair) const {
    const int n = succ_count(pair);
    return std::span<const double>(empirical_).subspan(mdp_->triple_offset(pair), n);
  }
  /// Frozen L1 radius for the pair's confidence ball.
  double radius(int pair) const { return radius_[pair]; }

  /// max over distributions p in the pair's confidence ball of <p, v>,
  /// by the greedy mass shift toward the highest-value successor.
  double max_expectation(int pair, std::span<const double> v) const;
  /// Exactly -max_expectation(pair, -v).
  double min_expectation(int pair, std::span<const double> v) const;

  /// Per-pair max/min of q^{P,pi}(x, a) over kernels in the confidence set,
  /// via a per-target backward DP over reach probabilities.
  std::vector<double> upper_occupancy(const Policy& policy) const;
  std::vector<double> lower_occupancy(const Policy& policy) const;

  /// Checkpoint of counters, frozen kernel and radii; lossless round trip.
  nlohmann::json to_json() const;
  static ConfidenceModel from_json(const LoopFreeCmdp& mdp, const nlohmann::json& doc);

 private:
  int succ_count(int pair) const {
    return static_cast<int>(mdp_->successors(mdp_->pair_state(pair)).size());
  }
  void refresh_frozen();
  std::vector<double> extremal_occupancy(const Policy& policy, bool upper) const;

  const LoopFreeCmdp* mdp_;
  long num_episodes_;
  double delta_;
  double log_term_;  // ln(T |X| |A| / delta)

  int epoch_ = 0;
  std::vector<long> visits_;            // N(x,a), cumulative
  std::vector<long> epoch_start_visits_;
  std::vector<long> transitions_;       // M(x'|x,a), cumulative, by triple
  std::vector<double> empirical_;       // frozen at epoch start, by triple
  std::vector<double> radius_;          // frozen at epoch start, by pair
};

}  // namespace pdbps
