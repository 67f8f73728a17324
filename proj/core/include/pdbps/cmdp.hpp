#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pdbps/errors.hpp"
#include "pdbps/rng.hpp"

namespace pdbps {

inline constexpr double kInputTol = 1e-12;    // structural sums on inputs
inline constexpr double kDerivedTol = 1e-9;   // accumulated float error on derived data

/// Episodic loop-free CMDP: states partitioned into layers X_0..X_H with
/// singleton first and last layers, transitions only advancing one layer.
/// States carry global ids 0..num_states-1; all vectors over state-action
/// pairs use a single flat index, layer-major.
class LoopFreeCmdp {
 public:
  /// `layers[h]` lists the state ids of layer h. `kernel` is indexed by
  /// flat pair, giving a distribution over the next layer (by position in
  /// `layers[h+1]`). Throws ValidationError/StructuralError on bad data.
  LoopFreeCmdp(std::vector<std::vector<int>> layers, int num_actions,
               std::vector<std::vector<double>> kernel, int num_constraints);

  int horizon() const { return static_cast<int>(layers_.size()) - 1; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int num_constraints() const { return num_constraints_; }
  const std::vector<std::vector<int>>& layers() const { return layers_; }

  int layer_of(int state) const { return layer_of_[state]; }
  int pos_in_layer(int state) const { return pos_in_layer_[state]; }
  int start_state() const { return layers_.front()[0]; }
  int terminal_state() const { return layers_.back()[0]; }

  /// Number of (x, a) pairs over non-terminal states.
  int num_pairs() const { return num_pairs_; }
  int pair_index(int state, int action) const { return pair_offset_[state] + action; }
  int pair_state(int pair) const { return pair_state_[pair]; }
  int pair_action(int pair) const { return pair - pair_offset_[pair_state_[pair]]; }

  /// Number of (x, a, x') triples consistent with the layer structure.
  int num_triples() const { return num_triples_; }
  int triple_index(int pair, int succ_pos) const { return triple_offset_[pair] + succ_pos; }
  int triple_offset(int pair) const { return triple_offset_[pair]; }

  /// Successor states of `state` (the next layer), for any action.
  std::span<const int> successors(int state) const {
    return std::span<const int>(layers_[layer_of_[state] + 1]);
  }

  /// P(. | x, a) over the next layer, by position.
  std::span<const double> kernel_row(int pair) const {
    return std::span<const double>(kernel_[pair]);
  }

 private:
  std::vector<std::vector<int>> layers_;
  int num_actions_ = 0;
  int num_constraints_ = 0;
  std::vector<std::vector<double>> kernel_;

  int num_states_ = 0;
  int num_pairs_ = 0;
  int num_triples_ = 0;
  std::vector<int> layer_of_;
  std::vector<int> pos_in_layer_;
  std::vector<int> pair_offset_;   // -1 for terminal state
  std::vector<int> pair_state_;
  std::vector<int> triple_offset_;
};

/// Stochastic policy over non-terminal states, flat over pairs.
struct Policy {
  std::vector<double> probs;

  double prob(const LoopFreeCmdp& mdp, int state, int action) const {
    return probs[mdp.pair_index(state, action)];
  }

  static Policy uniform(const LoopFreeCmdp& mdp);
  /// Throws ValidationError unless rows are nonnegative and sum to 1
  /// within kInputTol on every non-terminal state.
  void validate(const LoopFreeCmdp& mdp) const;
};

/// Per-episode reward vector r in [0,1]^{pairs}; range checked on construction.
struct RewardVector {
  std::vector<double> values;

  RewardVector() = default;
  explicit RewardVector(std::vector<double> v);
};

/// Per-episode constraint matrix G in [-1,1]^{pairs x m}, row g_i per
/// constraint, stored row-major.
struct ConstraintMatrix {
  int num_constraints = 0;
  std::vector<double> values;  // values[i * pairs + pair]

  ConstraintMatrix() = default;
  ConstraintMatrix(int m, std::vector<double> v);

  int num_pairs() const {
    return num_constraints == 0 ? 0 : static_cast<int>(values.size()) / num_constraints;
  }
  double g(int constraint, int pair) const { return values[constraint * num_pairs() + pair]; }
  std::span<const double> row(int constraint) const {
    return std::span<const double>(values).subspan(
        static_cast<std::size_t>(constraint) * num_pairs(), num_pairs());
  }
};

/// One episode of bandit feedback: the visited pairs with the rewards and
/// violations observed along them, nothing else.
struct Trajectory {
  struct Step {
    int state;
    int action;
    double reward;
    std::vector<double> violations;  // g_{t,i}(x_h, a_h) for i in [m]
  };
  std::vector<Step> steps;

  bool visited(const LoopFreeCmdp& mdp, int state, int action) const {
    const int h = mdp.layer_of(state);
    return h < static_cast<int>(steps.size()) && steps[h].state == state &&
           steps[h].action == action;
  }
  /// Throws ValidationError unless x_h lies in layer h for every step and
  /// the step count equals the horizon.
  void validate(const LoopFreeCmdp& mdp) const;
};

/// Plays one episode of `policy` against the true kernel, recording bandit
/// feedback along the realized path only. Bit-reproducible given the stream.
Trajectory rollout(const LoopFreeCmdp& mdp, const Policy& policy, const RewardVector& reward,
                   const ConstraintMatrix& constraints, RngStream& rng);

}  // namespace pdbps
