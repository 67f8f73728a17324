#include "pdbps/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdbps {

ConfidenceModel::ConfidenceModel(const LoopFreeCmdp& mdp, long num_episodes, double delta)
    : mdp_(&mdp), num_episodes_(num_episodes), delta_(delta) {
  if (num_episodes <= 0) throw StructuralError("confidence: num_episodes must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw StructuralError("confidence: delta must lie in (0,1)");
  log_term_ = std::log(static_cast<double>(num_episodes_) * mdp.num_states() *
                       mdp.num_actions() / delta_);
  visits_.assign(mdp.num_pairs(), 0);
  epoch_start_visits_.assign(mdp.num_pairs(), 0);
  transitions_.assign(mdp.num_triples(), 0);
  empirical_.assign(mdp.num_triples(), 0.0);
  radius_.assign(mdp.num_pairs(), 0.0);
  refresh_frozen();
}

void ConfidenceModel::refresh_frozen() {
  for (int pair = 0; pair < mdp_->num_pairs(); ++pair) {
    const int off = mdp_->triple_offset(pair);
    const int n = succ_count(pair);
    const long count = visits_[pair];
    if (count == 0) {
      for (int j = 0; j < n; ++j) empirical_[off + j] = 1.0 / n;
    } else {
      for (int j = 0; j < n; ++j)
        empirical_[off + j] = static_cast<double>(transitions_[off + j]) / count;
    }
    radius_[pair] = std::sqrt(2.0 * n * log_term_ / std::max<long>(1, count));
  }
}

void ConfidenceModel::update(const Trajectory& traj) {
  traj.validate(*mdp_);
  const int steps = static_cast<int>(traj.steps.size());
  for (int h = 0; h < steps; ++h) {
    const auto& step = traj.steps[h];
    const int pair = mdp_->pair_index(step.state, step.action);
    const int next = h + 1 < steps ? traj.steps[h + 1].state : mdp_->terminal_state();
    ++visits_[pair];
    ++transitions_[mdp_->triple_index(pair, mdp_->pos_in_layer(next))];
  }
  // Doubling rule; a first visit counts as a doubling of max(1, 0).
  bool doubled = false;
  for (int pair = 0; pair < mdp_->num_pairs() && !doubled; ++pair)
    doubled = visits_[pair] >= std::max<long>(1, 2 * epoch_start_visits_[pair]);
  if (doubled) {
    ++epoch_;
    epoch_start_visits_ = visits_;
    refresh_frozen();
  }
}

double ConfidenceModel::max_expectation(int pair, std::span<const double> v) const {
  const int n = succ_count(pair);
  if (static_cast<int>(v.size()) != n)
    throw StructuralError("confidence: value vector does not match successor layer");
  const auto succ = mdp_->successors(mdp_->pair_state(pair));
  const auto base = empirical(pair);

  // Order by value, ties by state id, so the shift is deterministic.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (v[lhs] != v[rhs]) return v[lhs] > v[rhs];
    return succ[lhs] < succ[rhs];
  });

  std::vector<double> p(base.begin(), base.end());
  const int top = order[0];
  double delta = std::min(radius_[pair] / 2.0, 1.0 - p[top]);
  p[top] += delta;
  for (int k = n - 1; k >= 1 && delta > 0.0; --k) {
    const int j = order[k];
    const double take = std::min(delta, p[j]);
    p[j] -= take;
    delta -= take;
  }
  double out = 0.0;
  for (int j = 0; j < n; ++j) out += p[j] * v[j];
  return out;
}

double ConfidenceModel::min_expectation(int pair, std::span<const double> v) const {
  std::vector<double> neg(v.begin(), v.end());
  for (double& x : neg) x = -x;
  return -max_expectation(pair, neg);
}

std::vector<double> ConfidenceModel::extremal_occupancy(const Policy& policy,
                                                        bool upper) const {
  policy.validate(*mdp_);
  const auto& layers = mdp_->layers();
  std::vector<double> out(mdp_->num_pairs(), 0.0);
  const int x0 = mdp_->start_state();

  for (int ht = 0; ht < mdp_->horizon(); ++ht) {
    for (int target_pos = 0; target_pos < static_cast<int>(layers[ht].size()); ++target_pos) {
      const int target = layers[ht][target_pos];
      double reach = 1.0;
      if (ht > 0) {
        // Backward DP on the extremal probability of reaching `target`.
        std::vector<double> value(layers[ht].size(), 0.0);
        value[target_pos] = 1.0;
        for (int h = ht - 1; h >= 0; --h) {
          std::vector<double> prev(layers[h].size(), 0.0);
          for (int pos = 0; pos < static_cast<int>(layers[h].size()); ++pos) {
            const int x = layers[h][pos];
            double vx = 0.0;
            for (int a = 0; a < mdp_->num_actions(); ++a) {
              const int pair = mdp_->pair_index(x, a);
              const double extremal = upper ? max_expectation(pair, value)
                                            : min_expectation(pair, value);
              vx += policy.probs[pair] * extremal;
            }
            prev[pos] = vx;
          }
          value = std::move(prev);
        }
        reach = value[mdp_->pos_in_layer(x0)];
      }
      for (int a = 0; a < mdp_->num_actions(); ++a) {
        const int pair = mdp_->pair_index(target, a);
        out[pair] = policy.probs[pair] * reach;
      }
    }
  }
  return out;
}

std::vector<double> ConfidenceModel::upper_occupancy(const Policy& policy) const {
  return extremal_occupancy(policy, true);
}

std::vector<double> ConfidenceModel::lower_occupancy(const Policy& policy) const {
  return extremal_occupancy(policy, false);
}

nlohmann::json ConfidenceModel::to_json() const {
  nlohmann::json doc;
  doc["num_episodes"] = num_episodes_;
  doc["delta"] = delta_;
  doc["epoch"] = epoch_;
  doc["visits"] = visits_;
  doc["epoch_start_visits"] = epoch_start_visits_;
  doc["transitions"] = transitions_;
  doc["empirical"] = empirical_;
  doc["radius"] = radius_;
  return doc;
}

ConfidenceModel ConfidenceModel::from_json(const LoopFreeCmdp& mdp, const nlohmann::json& doc) {
  ConfidenceModel model(mdp, doc.at("num_episodes").get<long>(), doc.at("delta").get<double>());
  model.epoch_ = doc.at("epoch").get<int>();
  model.visits_ = doc.at("visits").get<std::vector<long>>();
  model.epoch_start_visits_ = doc.at("epoch_start_visits").get<std::vector<long>>();
  model.transitions_ = doc.at("transitions").get<std::vector<long>>();
  model.empirical_ = doc.at("empirical").get<std::vector<double>>();
  model.radius_ = doc.at("radius").get<std::vector<double>>();
  if (static_cast<int>(model.visits_.size()) != mdp.num_pairs() ||
      static_cast<int>(model.transitions_.size()) != mdp.num_triples())
    throw StructuralError("confidence: checkpoint does not match the mdp");
  return model;
}

}  // namespace pdbps
