#include "pdbps/cmdp.hpp"

#include <cmath>
#include <string>

namespace pdbps {

LoopFreeCmdp::LoopFreeCmdp(std::vector<std::vector<int>> layers, int num_actions,
                           std::vector<std::vector<double>> kernel, int num_constraints)
    : layers_(std::move(layers)),
      num_actions_(num_actions),
      num_constraints_(num_constraints),
      kernel_(std::move(kernel)) {
  if (layers_.size() < 2) throw StructuralError("cmdp: need at least layers X_0 and X_H");
  if (num_actions_ <= 0) throw StructuralError("cmdp: num_actions must be positive");
  if (num_constraints_ < 0) throw StructuralError("cmdp: num_constraints must be nonnegative");
  if (layers_.front().size() != 1 || layers_.back().size() != 1)
    throw ValidationError("cmdp: layers X_0 and X_H must be singletons");

  for (const auto& layer : layers_) {
    if (layer.empty()) throw ValidationError("cmdp: empty layer");
    num_states_ += static_cast<int>(layer.size());
  }
  layer_of_.assign(num_states_, -1);
  pos_in_layer_.assign(num_states_, -1);
  for (int h = 0; h < static_cast<int>(layers_.size()); ++h) {
    for (int p = 0; p < static_cast<int>(layers_[h].size()); ++p) {
      const int x = layers_[h][p];
      if (x < 0 || x >= num_states_)
        throw ValidationError("cmdp: state ids must be 0..num_states-1, got " +
                              std::to_string(x));
      if (layer_of_[x] != -1)
        throw ValidationError("cmdp: state " + std::to_string(x) + " appears in two layers");
      layer_of_[x] = h;
      pos_in_layer_[x] = p;
    }
  }

  pair_offset_.assign(num_states_, -1);
  for (int h = 0; h + 1 < static_cast<int>(layers_.size()); ++h) {
    for (int x : layers_[h]) {
      pair_offset_[x] = num_pairs_;
      num_pairs_ += num_actions_;
      for (int a = 0; a < num_actions_; ++a) pair_state_.push_back(x);
    }
  }

  if (static_cast<int>(kernel_.size()) != num_pairs_)
    throw StructuralError("cmdp: kernel must have one row per (x, a) pair");
  triple_offset_.assign(num_pairs_, 0);
  for (int pair = 0; pair < num_pairs_; ++pair) {
    const int x = pair_state_[pair];
    const auto& next = layers_[layer_of_[x] + 1];
    if (kernel_[pair].size() != next.size())
      throw StructuralError("cmdp: kernel row for pair " + std::to_string(pair) +
                            " does not match the next layer size");
    double sum = 0.0;
    for (double p : kernel_[pair]) {
      if (p < 0.0 || p > 1.0)
        throw ValidationError("cmdp: kernel probability out of [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kInputTol)
      throw ValidationError("cmdp: kernel row for pair " + std::to_string(pair) +
                            " sums to " + std::to_string(sum) + ", expected 1");
    triple_offset_[pair] = num_triples_;
    num_triples_ += static_cast<int>(next.size());
  }
}

Policy Policy::uniform(const LoopFreeCmdp& mdp) {
  Policy pi;
  pi.probs.assign(mdp.num_pairs(), 1.0 / mdp.num_actions());
  return pi;
}

void Policy::validate(const LoopFreeCmdp& mdp) const {
  if (static_cast<int>(probs.size()) != mdp.num_pairs())
    throw StructuralError("policy: expected " + std::to_string(mdp.num_pairs()) +
                          " entries, got " + std::to_string(probs.size()));
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      double sum = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double p = probs[mdp.pair_index(x, a)];
        if (p < 0.0) throw ValidationError("policy: negative probability at state " +
                                           std::to_string(x));
        sum += p;
      }
      if (std::abs(sum - 1.0) > kInputTol)
        throw ValidationError("policy: probabilities at state " + std::to_string(x) +
                              " sum to " + std::to_string(sum));
    }
  }
}

RewardVector::RewardVector(std::vector<double> v) : values(std::move(v)) {
  for (double r : values)
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("reward: entry out of [0,1]");
}

ConstraintMatrix::ConstraintMatrix(int m, std::vector<double> v)
    : num_constraints(m), values(std::move(v)) {
  if (m < 0) throw StructuralError("constraints: negative constraint count");
  if (m > 0 && values.size() % static_cast<std::size_t>(m) != 0)
    throw StructuralError("constraints: size not divisible by constraint count");
  for (double g : values)
    if (!(g >= -1.0 && g <= 1.0)) throw ValidationError("constraints: entry out of [-1,1]");
}

void Trajectory::validate(const LoopFreeCmdp& mdp) const {
  if (static_cast<int>(steps.size()) != mdp.horizon())
    throw ValidationError("trajectory: expected " + std::to_string(mdp.horizon()) + " steps");
  for (int h = 0; h < static_cast<int>(steps.size()); ++h) {
    if (mdp.layer_of(steps[h].state) != h)
      throw ValidationError("trajectory: state at step " + std::to_string(h) +
                            " is not in layer " + std::to_string(h));
    if (steps[h].action < 0 || steps[h].action >= mdp.num_actions())
      throw ValidationError("trajectory: action out of range");
  }
}

Trajectory rollout(const LoopFreeCmdp& mdp, const Policy& policy, const RewardVector& reward,
                   const ConstraintMatrix& constraints, RngStream& rng) {
  if (static_cast<int>(policy.probs.size()) != mdp.num_pairs())
    throw StructuralError("rollout: policy does not match the mdp");
  if (static_cast<int>(reward.values.size()) != mdp.num_pairs())
    throw StructuralError("rollout: reward vector does not match the mdp");
  if (constraints.num_constraints != mdp.num_constraints() ||
      constraints.num_pairs() != mdp.num_pairs())
    throw StructuralError("rollout: constraint matrix does not match the mdp");

  Trajectory traj;
  traj.steps.reserve(mdp.horizon());
  int x = mdp.start_state();
  for (int h = 0; h < mdp.horizon(); ++h) {
    const int base = mdp.pair_index(x, 0);
    const auto pi_row = std::span<const double>(policy.probs).subspan(base, mdp.num_actions());
    const int a = static_cast<int>(rng.categorical(pi_row));
    const int pair = base + a;

    Trajectory::Step step;
    step.state = x;
    step.action = a;
    step.reward = reward.values[pair];
    step.violations.resize(mdp.num_constraints());
    for (int i = 0; i < mdp.num_constraints(); ++i) step.violations[i] = constraints.g(i, pair);
    traj.steps.push_back(std::move(step));

    const auto succ = mdp.successors(x);
    x = succ[rng.categorical(mdp.kernel_row(pair))];
  }
  return traj;
}

}  // namespace pdbps
