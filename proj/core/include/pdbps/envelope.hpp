#pragma once

#include <json.hpp>

namespace pdbps {

/// Theory-constant dictionary evaluated for one instance shape: the primal,
/// dual, and deviation bound coefficients, the learning-rate scales, the
/// multiplier cap, and the feasibility-margin threshold. Pure function of
/// its parameters.
struct BoundEnvelope {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int num_constraints = 0;
  long num_episodes = 0;
  double delta = 0.0;
  double rho = 0.0;

  double u1 = 0.0, u2 = 0.0, u3 = 0.0, u4 = 0.0;  // primal bound terms
  double d1 = 0.0, d2 = 0.0;                      // dual bound terms
  double b1 = 0.0;                                // constraint-deviation term
  double f1 = 0.0;                                // indicator-deviation term
  double scale_c = 0.0;                           // primal scale constant
  double dual_scale_d = 0.0;                      // dual scale constant
  double eta_paper = 0.0;                         // dual step at paper scale
  double lambda_cap = 0.0;                        // +inf when rho == 0
  double condition2_threshold = 0.0;
  bool condition2_holds = false;

  /// U1 Xi C sqrt(T) + U2 Xi len / (C sqrt(T)) + U3 Xi / (C sqrt(T)) + U4 Xi sqrt(T).
  double primal_bound(long t1, long t2, double loss_range) const;
  /// D1 ||lambda_t1||^2 / eta + D2 eta len, at the paper-scale step.
  double dual_bound(long t1, long t2, double lambda_t1_sq_norm) const;
  double constraint_dev_bound(long t1, long t2) const;  // B1 sqrt(len)
  double indicator_dev_bound(long t1, long t2) const;   // F1 sqrt(len)
};

BoundEnvelope envelope(int num_states, int num_actions, int horizon, int num_constraints,
                       long num_episodes, double delta, double rho);

/// Infinite caps are rendered as the string "inf".
nlohmann::json envelope_to_json(const BoundEnvelope& env);

}  // namespace pdbps
