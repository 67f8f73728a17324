#include "pdbps/occupancy.hpp"

#include <cmath>
#include <string>

namespace pdbps {

OccupancyMeasure OccupancyMeasure::from_q3(const LoopFreeCmdp& mdp, std::vector<double> q3) {
  if (static_cast<int>(q3.size()) != mdp.num_triples())
    throw StructuralError("occupancy: expected " + std::to_string(mdp.num_triples()) +
                          " triples, got " + std::to_string(q3.size()));
  OccupancyMeasure q;
  q.q3 = std::move(q3);
  q.q2.assign(mdp.num_pairs(), 0.0);
  q.q1.assign(mdp.num_states(), 0.0);
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const int off = mdp.triple_offset(pair);
    const int n = static_cast<int>(mdp.successors(mdp.pair_state(pair)).size());
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += q.q3[off + j];
    q.q2[pair] = s;
    q.q1[mdp.pair_state(pair)] += s;
  }
  // Terminal mass is the inflow into x_H.
  double terminal = 0.0;
  for (int x : mdp.layers()[mdp.horizon() - 1])
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const int pair = mdp.pair_index(x, a);
      terminal += q.q2[pair];
    }
  q.q1[mdp.terminal_state()] = terminal;
  return q;
}

void OccupancyMeasure::validate(const LoopFreeCmdp& mdp) const {
  if (static_cast<int>(q3.size()) != mdp.num_triples())
    throw ValidationError("occupancy: q3 size does not match the mdp");
  for (double v : q3)
    if (!(v >= -kDerivedTol && v <= 1.0 + kDerivedTol))
      throw ValidationError("occupancy: entry out of [0,1]");

  for (int h = 0; h < mdp.horizon(); ++h) {
    double layer_sum = 0.0;
    for (int x : mdp.layers()[h])
      for (int a = 0; a < mdp.num_actions(); ++a) layer_sum += q2[mdp.pair_index(x, a)];
    if (std::abs(layer_sum - 1.0) > kDerivedTol)
      throw ValidationError("occupancy: condition (i) violated at layer " + std::to_string(h) +
                            " (mass " + std::to_string(layer_sum) + ")");
  }

  for (int h = 1; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      double outflow = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) outflow += q2[mdp.pair_index(x, a)];
      double inflow = 0.0;
      const int pos = mdp.pos_in_layer(x);
      for (int xp : mdp.layers()[h - 1])
        for (int a = 0; a < mdp.num_actions(); ++a)
          inflow += q3[mdp.triple_index(mdp.pair_index(xp, a), pos)];
      if (std::abs(inflow - outflow) > kDerivedTol)
        throw ValidationError("occupancy: condition (ii) violated at state " + std::to_string(x) +
                              " (in " + std::to_string(inflow) + ", out " +
                              std::to_string(outflow) + ")");
    }
  }
}

OccupancyMeasure occupancy_from_policy(const LoopFreeCmdp& mdp, const Policy& policy) {
  policy.validate(mdp);
  std::vector<double> reach(mdp.num_states(), 0.0);
  reach[mdp.start_state()] = 1.0;
  std::vector<double> q3(mdp.num_triples(), 0.0);
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      if (reach[x] == 0.0) continue;
      const auto succ = mdp.successors(x);
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        const double mass = reach[x] * policy.probs[pair];
        if (mass == 0.0) continue;
        const auto row = mdp.kernel_row(pair);
        for (int j = 0; j < static_cast<int>(succ.size()); ++j) {
          const double v = mass * row[j];
          q3[mdp.triple_index(pair, j)] = v;
          reach[succ[j]] += v;
        }
      }
    }
  }
  return OccupancyMeasure::from_q3(mdp, std::move(q3));
}

std::pair<Policy, std::vector<std::vector<double>>> policy_from_occupancy(
    const LoopFreeCmdp& mdp, const OccupancyMeasure& q) {
  q.validate(mdp);
  Policy pi;
  pi.probs.assign(mdp.num_pairs(), 0.0);
  std::vector<std::vector<double>> kernel(mdp.num_pairs());
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      const double qx = q.q1[x];
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        pi.probs[pair] = qx > 0.0 ? q.q2[pair] / qx : 1.0 / mdp.num_actions();
        const int n = static_cast<int>(mdp.successors(x).size());
        kernel[pair].resize(n);
        const double qxa = q.q2[pair];
        for (int j = 0; j < n; ++j)
          kernel[pair][j] =
              qxa > 0.0 ? q.q3[mdp.triple_index(pair, j)] / qxa : 1.0 / n;
      }
    }
  }
  return {std::move(pi), std::move(kernel)};
}

double evaluate(const LoopFreeCmdp& mdp, const OccupancyMeasure& q, std::span<const double> f) {
  if (static_cast<int>(f.size()) != mdp.num_pairs() ||
      static_cast<int>(q.q2.size()) != mdp.num_pairs())
    throw StructuralError("evaluate: dimension mismatch");
  double total = 0.0;
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) total += q.q2[pair] * f[pair];
  return total;
}

}  // namespace pdbps
