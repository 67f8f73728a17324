#pragma once

#include <utility>
#include <vector>

#include "pdbps/cmdp.hpp"

namespace pdbps {

/// Occupancy measure q(x, a, x') over layer transitions, with the derived
/// marginals q(x, a) and q(x). Valid measures satisfy, per layer, unit total
/// mass (condition i) and inflow/outflow balance at internal states
/// (condition ii).
struct OccupancyMeasure {
  std::vector<double> q3;      // flat over triples
  std::vector<double> q2;      // flat over pairs, q(x,a) = sum_{x'} q(x,a,x')
  std::vector<double> q1;      // per state, q(x) = sum_a q(x,a); 1 at terminal

  static OccupancyMeasure from_q3(const LoopFreeCmdp& mdp, std::vector<double> q3);

  /// Throws ValidationError naming the violated condition; tolerance
  /// kDerivedTol on the sums, entries clamped-checked against [0,1].
  void validate(const LoopFreeCmdp& mdp) const;
};

/// Forward DP giving the occupancy q^{P,pi} induced by the true kernel.
OccupancyMeasure occupancy_from_policy(const LoopFreeCmdp& mdp, const Policy& policy);

/// Inverts a valid occupancy into the policy and kernel it induces:
/// pi(a|x) = q(x,a)/q(x) and P(x'|x,a) = q(x,a,x')/q(x,a). Zero-mass states
/// and pairs fall back to the uniform distribution. Validates q first.
std::pair<Policy, std::vector<std::vector<double>>> policy_from_occupancy(
    const LoopFreeCmdp& mdp, const OccupancyMeasure& q);

/// <q, f> = sum_{x,a} q(x,a) f(x,a).
double evaluate(const LoopFreeCmdp& mdp, const OccupancyMeasure& q,
                std::span<const double> f);

}  // namespace pdbps
