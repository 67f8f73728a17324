#include "pdbps/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pdbps {

namespace {

// Rows shared by every occupancy LP: variables are q(x,a,x'), constrained by
// per-layer unit mass (i), flow conservation (ii), and consistency with the
// known kernel (iii).
void add_occupancy_rows(const LoopFreeCmdp& mdp, LinearProgram& lp) {
  for (int h = 0; h < mdp.horizon(); ++h) {
    auto& row = lp.add_row(LinearProgram::Rel::Eq, 1.0);
    for (int x : mdp.layers()[h])
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        const int n = static_cast<int>(mdp.successors(x).size());
        for (int j = 0; j < n; ++j) row.coeffs[mdp.triple_index(pair, j)] = 1.0;
      }
  }

  for (int h = 1; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      auto& row = lp.add_row(LinearProgram::Rel::Eq, 0.0);
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const int pair = mdp.pair_index(x, a);
        const int n = static_cast<int>(mdp.successors(x).size());
        for (int j = 0; j < n; ++j) row.coeffs[mdp.triple_index(pair, j)] += 1.0;
      }
      const int pos = mdp.pos_in_layer(x);
      for (int xp : mdp.layers()[h - 1])
        for (int a = 0; a < mdp.num_actions(); ++a)
          row.coeffs[mdp.triple_index(mdp.pair_index(xp, a), pos)] -= 1.0;
    }
  }

  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const auto probs = mdp.kernel_row(pair);
    const int n = static_cast<int>(probs.size());
    for (int j = 0; j < n; ++j) {
      auto& row = lp.add_row(LinearProgram::Rel::Eq, 0.0);
      for (int jp = 0; jp < n; ++jp)
        row.coeffs[mdp.triple_index(pair, jp)] = (j == jp ? 1.0 : 0.0) - probs[j];
    }
  }
}

// Constraint rows as vectors over pairs, exact duplicates merged.
std::vector<std::vector<double>> dedup_constraint_rows(
    const LoopFreeCmdp& mdp, std::span<const ConstraintMatrix> episodes) {
  std::map<std::vector<double>, int> seen;
  std::vector<std::vector<double>> rows;
  for (const auto& g : episodes) {
    if (g.num_constraints != mdp.num_constraints() || g.num_pairs() != mdp.num_pairs())
      throw StructuralError("oracle: constraint matrix does not match the mdp");
    for (int i = 0; i < g.num_constraints; ++i) {
      std::vector<double> row(g.row(i).begin(), g.row(i).end());
      if (seen.emplace(row, 1).second) rows.push_back(std::move(row));
    }
  }
  return rows;
}

void add_pair_coeffs(const LoopFreeCmdp& mdp, LinearProgram::Row& row,
                     std::span<const double> per_pair, double scale) {
  for (int pair = 0; pair < mdp.num_pairs(); ++pair) {
    const double c = scale * per_pair[pair];
    if (c == 0.0) continue;
    const int n = static_cast<int>(mdp.successors(mdp.pair_state(pair)).size());
    for (int j = 0; j < n; ++j) row.coeffs[mdp.triple_index(pair, j)] += c;
  }
}

OccupancyMeasure extract_occupancy(const LoopFreeCmdp& mdp, std::span<const double> x) {
  std::vector<double> q3(x.begin(), x.begin() + mdp.num_triples());
  for (double& v : q3) {
    if (v < 0.0 && v > -kDerivedTol) v = 0.0;
  }
  auto q = OccupancyMeasure::from_q3(mdp, std::move(q3));
  q.validate(mdp);
  return q;
}

}  // namespace

OptResult solve_opt(const LoopFreeCmdp& mdp, const RewardVector& reward,
                    const ConstraintMatrix& constraints, const LpSolver& solver) {
  if (static_cast<int>(reward.values.size()) != mdp.num_pairs())
    throw StructuralError("oracle: reward vector does not match the mdp");
  LinearProgram lp;
  lp.num_vars = mdp.num_triples();
  lp.objective.assign(lp.num_vars, 0.0);
  {
    LinearProgram::Row obj{std::vector<double>(lp.num_vars, 0.0), LinearProgram::Rel::Eq, 0.0};
    add_pair_coeffs(mdp, obj, reward.values, 1.0);
    lp.objective = std::move(obj.coeffs);
  }
  add_occupancy_rows(mdp, lp);
  const auto rows = dedup_constraint_rows(mdp, std::span<const ConstraintMatrix>(&constraints, 1));
  for (const auto& g_row : rows) {
    auto& row = lp.add_row(LinearProgram::Rel::Le, 0.0);
    add_pair_coeffs(mdp, row, g_row, 1.0);
  }

  const auto sol = solver.maximize(lp);
  return OptResult{sol.value, extract_occupancy(mdp, sol.x)};
}

RhoResult solve_rho(const LoopFreeCmdp& mdp, std::span<const ConstraintMatrix> episodes,
                    const LpSolver& solver) {
  const auto rows = dedup_constraint_rows(mdp, episodes);
  if (rows.empty()) {
    // No constraints: every occupancy satisfies them with the maximal margin.
    auto q = occupancy_from_policy(mdp, Policy::uniform(mdp));
    return RhoResult{static_cast<double>(mdp.horizon()), static_cast<double>(mdp.horizon()),
                     std::move(q)};
  }

  // max s  s.t.  G^T q + s <= 0 for every row, q in Delta(M); the split
  // s = s+ - s- keeps the margin variable sign-free.
  LinearProgram lp;
  lp.num_vars = mdp.num_triples() + 2;
  const int s_plus = mdp.num_triples();
  const int s_minus = mdp.num_triples() + 1;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.objective[s_plus] = 1.0;
  lp.objective[s_minus] = -1.0;
  add_occupancy_rows(mdp, lp);
  for (const auto& g_row : rows) {
    auto& row = lp.add_row(LinearProgram::Rel::Le, 0.0);
    add_pair_coeffs(mdp, row, g_row, 1.0);
    row.coeffs[s_plus] = 1.0;
    row.coeffs[s_minus] = -1.0;
  }

  const auto sol = solver.maximize(lp);
  RhoResult out;
  out.rho_raw = sol.value;
  out.rho = std::max(0.0, sol.value);
  out.q_circ = extract_occupancy(mdp, sol.x);
  return out;
}

RhoResult solve_rho(const LoopFreeCmdp& mdp, const ConstraintMatrix& gbar,
                    const LpSolver& solver) {
  return solve_rho(mdp, std::span<const ConstraintMatrix>(&gbar, 1), solver);
}

OptResult solve_weak_opt(const LoopFreeCmdp& mdp, const RewardVector& rbar,
                         std::span<const ConstraintMatrix> episodes, const LpSolver& solver) {
  if (static_cast<int>(rbar.values.size()) != mdp.num_pairs())
    throw StructuralError("oracle: reward vector does not match the mdp");
  LinearProgram lp;
  constexpr std::size_t kMaxDistinctRows = 20000;  // dense-solver ceiling
  lp.num_vars = mdp.num_triples();
  {
    LinearProgram::Row obj{std::vector<double>(lp.num_vars, 0.0), LinearProgram::Rel::Eq, 0.0};
    add_pair_coeffs(mdp, obj, rbar.values, 1.0);
    lp.objective = std::move(obj.coeffs);
  }
  add_occupancy_rows(mdp, lp);
  const auto rows = dedup_constraint_rows(mdp, episodes);
  if (rows.size() > kMaxDistinctRows)
    throw StructuralError("oracle: " + std::to_string(rows.size()) +
                          " distinct constraint rows exceed the dense-solver ceiling");
  for (const auto& g_row : rows) {
    auto& row = lp.add_row(LinearProgram::Rel::Le, 0.0);
    add_pair_coeffs(mdp, row, g_row, 1.0);
  }
  const auto sol = solver.maximize(lp);
  return OptResult{sol.value, extract_occupancy(mdp, sol.x)};
}

double lambda_cap_for(double rho, int num_constraints, int horizon) {
  if (rho <= 0.0) return std::numeric_limits<double>::infinity();
  return 112.0 * num_constraints * horizon * horizon / (rho * rho);
}

double condition2_threshold(int horizon, int num_constraints, long num_episodes) {
  return std::pow(static_cast<double>(num_episodes), -0.125) * horizon *
         std::sqrt(112.0 * num_constraints);
}

OracleSolution solve_oracle(const LoopFreeCmdp& mdp, const RewardVector& rbar,
                            const ConstraintMatrix& gbar, long num_episodes,
                            const LpSolver& solver) {
  OracleSolution out;
  auto opt = solve_opt(mdp, rbar, gbar, solver);
  out.opt_value = opt.value;
  out.q_star = std::move(opt.q);
  auto rho = solve_rho(mdp, gbar, solver);
  out.rho = rho.rho;
  out.rho_raw = rho.rho_raw;
  out.q_circ = std::move(rho.q_circ);
  out.lambda_cap = lambda_cap_for(out.rho, mdp.num_constraints(), mdp.horizon());
  out.condition2_holds =
      out.rho >= condition2_threshold(mdp.horizon(), mdp.num_constraints(), num_episodes);
  return out;
}

}  // namespace pdbps
