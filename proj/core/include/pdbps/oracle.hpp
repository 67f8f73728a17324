#pragma once

#include <span>
#include <vector>

#include "pdbps/cmdp.hpp"
#include "pdbps/occupancy.hpp"
#include "pdbps/simplex.hpp"

namespace pdbps {

inline constexpr double kLpTol = 1e-7;

/// Everything the offline baselines provide: the constrained optimum, the
/// feasibility margin rho with its witness, and the induced multiplier cap.
struct OracleSolution {
  double opt_value = 0.0;
  OccupancyMeasure q_star;
  double rho = 0.0;      // max(0, rho_raw)
  double rho_raw = 0.0;  // may be <= 0 when strict satisfaction is impossible
  OccupancyMeasure q_circ;
  double lambda_cap = 0.0;  // 112 m H^2 / rho^2; +inf when rho == 0
  bool condition2_holds = false;
};

struct OptResult {
  double value = 0.0;
  OccupancyMeasure q;
};

struct RhoResult {
  double rho = 0.0;
  double rho_raw = 0.0;
  OccupancyMeasure q_circ;
};

/// max r^T q over valid occupancies of the true kernel subject to
/// G^T q <= 0 componentwise. Throws InfeasibleError when empty.
OptResult solve_opt(const LoopFreeCmdp& mdp, const RewardVector& reward,
                    const ConstraintMatrix& constraints,
                    const LpSolver& solver = default_lp_solver());

/// max_q min over all given episodes and constraints of -[G_t^T q]_i, via an
/// auxiliary scalar. One matrix gives the averaged/stochastic margin; a
/// sequence gives the per-episode adversarial margin. Never throws: a
/// nonpositive raw value is reported and clamped in `rho`.
RhoResult solve_rho(const LoopFreeCmdp& mdp, std::span<const ConstraintMatrix> episodes,
                    const LpSolver& solver = default_lp_solver());
RhoResult solve_rho(const LoopFreeCmdp& mdp, const ConstraintMatrix& gbar,
                    const LpSolver& solver = default_lp_solver());

/// max rbar^T q subject to G_t^T q <= 0 for every episode. Duplicate
/// constraint rows are merged before solving. Throws InfeasibleError.
OptResult solve_weak_opt(const LoopFreeCmdp& mdp, const RewardVector& rbar,
                         std::span<const ConstraintMatrix> episodes,
                         const LpSolver& solver = default_lp_solver());

double lambda_cap_for(double rho, int num_constraints, int horizon);
double condition2_threshold(int horizon, int num_constraints, long num_episodes);

/// Full baseline bundle for a scenario with averaged reward/constraints.
OracleSolution solve_oracle(const LoopFreeCmdp& mdp, const RewardVector& rbar,
                            const ConstraintMatrix& gbar, long num_episodes,
                            const LpSolver& solver = default_lp_solver());

}  // namespace pdbps
